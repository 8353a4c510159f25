#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fbnav {

enum class ErrorCode {
    Parse,
    DuplicateId,
    SelfLoop,
    DanglingEdge,
    Disconnected,
    UnknownId,
    InvalidArgument,
    VersionMismatch,
    Schema,
    EnvMismatch,
    GenerationExhausted,
    Contract,
    Io,
};

std::string_view to_string(ErrorCode code);

/// All library failures surface as this exception; code() is stable and
/// is what the CLI prints on its machine-readable error line.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace fbnav
