#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbnav/envgraph.hpp"
#include "fbnav/membank.hpp"
#include "fbnav/rollout.hpp"
#include "fbnav/synthlang.hpp"

namespace fbnav {

enum class EndpointKind { Corrected, Confirmed };

std::string_view to_string(EndpointKind k);

struct FeedbackResult {
    NodeIndex endpoint = 0;
    EndpointKind kind = EndpointKind::Confirmed;

    friend bool operator==(const FeedbackResult&, const FeedbackResult&) = default;
};

/// The user's episode-level answer: the true goal when the agent stopped
/// elsewhere, otherwise a confirmation of the agent's own stop.
FeedbackResult feedback_fn(NodeIndex v_terminal, NodeIndex v_goal);

/// A corrected (instruction, trajectory) pair with its provenance.
struct FeedbackSample {
    Instruction instruction;
    NodePath tau_plus;
    EndpointKind kind = EndpointKind::Corrected;
    std::string session;
};

/// Append-only within a session.
class AdaptDataset {
public:
    void append(FeedbackSample s) { samples_.push_back(std::move(s)); }
    void append(const AdaptDataset& other) {
        samples_.insert(samples_.end(), other.samples_.begin(), other.samples_.end());
    }

    const std::vector<FeedbackSample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    /// First n samples (all of them when n >= size()).
    AdaptDataset head(std::size_t n) const;

private:
    std::vector<FeedbackSample> samples_;
};

/// A* from the episode's first viewpoint to `endpoint` over the bank's
/// discovered graph; nullopt when the endpoint is undiscovered or
/// unreachable there.
std::optional<NodePath> lift(const Episode& ep, NodeIndex endpoint, const MemoryBank& m);

/// Keep iff bounds.min <= |tau| <= bounds.max (node count).
bool length_filter(const NodePath& tau, LengthRange bounds = {5, 7});

struct CollectStats {
    std::size_t episodes = 0;
    std::size_t confirmed = 0;
    std::size_t corrected = 0;
    std::size_t infeasible = 0;
    std::size_t rejected = 0;
    std::size_t kept = 0;

    /// Share of feasible lifts removed by the length filter.
    double rejection_rate() const;
    double feasibility_rate() const;
};

struct CollectOptions {
    LengthRange bounds{5, 7};
    std::string session = "s1";
};

/// Feedback, lifting and filtering for each episode against one bank
/// snapshot. `instructions[k]` is the instruction episode k executed.
std::pair<AdaptDataset, CollectStats> collect(const EnvGraph& g, std::span<const Episode> episodes,
                                              std::span<const Instruction> instructions, const MemoryBank& m,
                                              const CollectOptions& opts = {});

// Adaptation dataset, JSON Lines:
// {"instr_id","tokens","tau_plus","kind","session","style"}.
void write_dataset(const AdaptDataset& d, const EnvGraph& g, const std::filesystem::path& path);
/// Rebuilt instructions carry start/goal from tau_plus and no gt_path.
AdaptDataset read_dataset(const std::filesystem::path& path, const EnvGraph& g);

}  // namespace fbnav
