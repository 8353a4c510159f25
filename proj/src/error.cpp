#include "fbnav/error.hpp"

namespace fbnav {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::Parse: return "parse";
        case ErrorCode::DuplicateId: return "duplicate-id";
        case ErrorCode::SelfLoop: return "self-loop";
        case ErrorCode::DanglingEdge: return "dangling-edge";
        case ErrorCode::Disconnected: return "disconnected";
        case ErrorCode::UnknownId: return "unknown-id";
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::VersionMismatch: return "version-mismatch";
        case ErrorCode::Schema: return "schema";
        case ErrorCode::EnvMismatch: return "env-mismatch";
        case ErrorCode::GenerationExhausted: return "generation-exhausted";
        case ErrorCode::Contract: return "contract";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

}  // namespace fbnav
