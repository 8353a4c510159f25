#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "fbnav/envgraph.hpp"
#include "fbnav/membank.hpp"
#include "fbnav/policy.hpp"

namespace fbnav {

inline constexpr std::size_t kDefaultTMax = 15;

/// One executed instruction. `actions` are primitive: a frontier move is
/// recorded as one MOVE per hop, so T == actions.size() and every hop
/// counts against T_max.
struct Episode {
    std::string instr_id;
    NodePath trajectory;
    std::vector<NavAction> actions;
    NodeIndex terminal = 0;
    std::size_t T = 0;
    bool truncated = false;
};

enum class SelectMode { Greedy, Sample };

/// Chooses the next action given the state and its valid actions.
using ActionChooser = std::function<NavAction(const NavState&, const std::vector<NavAction>&)>;

/// Called exactly once per episode, at the terminal step T.
using FeedbackTrigger = std::function<void(std::size_t T, const NavState&)>;

/// Runs `choose` from the task's start until the first STOP or until T_max
/// primitive steps have been taken. Observes every entered node into `bank`.
Episode run_scripted(const Task& task, MemoryBank& bank, std::size_t t_max, const ActionChooser& choose,
                     const FeedbackTrigger& trigger = {});

struct RolloutOptions {
    std::size_t t_max = kDefaultTMax;
    SelectMode mode = SelectMode::Greedy;
    std::uint64_t seed = 0;  // sample mode: per-episode stream from (seed, instruction id)
};

/// Greedy ties resolve to the first action in valid_actions() order.
Episode run_episode(std::span<const double> theta, const Task& task, MemoryBank& bank,
                    const RolloutOptions& opts, const FeedbackTrigger& trigger = {});

/// Expert action toward `target`: next hop along a geodesic (lowest id on
/// ties), STOP at the target.
NavAction expert_action(const EnvGraph& g, const GeoTable& geo, NodeIndex current, NodeIndex target);

struct DaggerRollout {
    Episode episode;
    std::vector<Decision> decisions;  // every visited decision state, labeled by the expert
    std::vector<NavAction> labels;
};

/// At each decision executes the expert with probability beta, otherwise
/// samples the policy; always records the expert's label. With beta = 0 the
/// executed trajectory is exactly run_episode(Sample, seed).
DaggerRollout dagger_rollout(std::span<const double> theta, const Task& task, MemoryBank& bank, NodeIndex target,
                             const GeoTable& geo, double beta, std::uint64_t seed,
                             std::size_t t_max = kDefaultTMax);

// Episode log, JSON Lines.
void write_episodes(const std::vector<Episode>& episodes, const EnvGraph& g, const std::filesystem::path& path);

}  // namespace fbnav
