#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "fbnav/envgraph.hpp"
#include "fbnav/feedback.hpp"
#include "fbnav/membank.hpp"
#include "fbnav/metrics.hpp"
#include "fbnav/policy.hpp"
#include "fbnav/rollout.hpp"
#include "fbnav/synthlang.hpp"

namespace fbnav {

using StyleBook = std::map<std::string, StyleMap>;

const StyleMap& style_of(const StyleBook& styles, const Instruction& instr);

/// Everything fixed for one environment during a run. Referenced objects
/// must outlive the scenario.
struct Scenario {
    const EnvGraph* env = nullptr;
    const GeoTable* geo = nullptr;
    const FeatureSpace* space = nullptr;
    const StyleBook* styles = nullptr;
    std::size_t t_max = kDefaultTMax;
    double d_th = kDefaultSuccessThreshold;
    LengthRange filter{5, 7};
    LengthRange instr_len{5, 7};
};

/// Action sets seen at each decision of one episode.
using EpisodeStates = std::vector<std::vector<FeatureVec>>;

/// Deployment: greedy episodes run in order on one shared bank,
/// then feedback is collected against the final bank.
struct DeployResult {
    std::vector<Episode> episodes;
    /// Coverage at the start of each episode, after its start is observed.
    std::vector<double> coverage_trace;
    /// Whether each episode's feedback could be lifted on the bank as it
    /// stood right after that episode.
    std::vector<bool> online_feasible;
    std::vector<EpisodeStates> states;
    AdaptDataset data;
    CollectStats stats;
    MetricsReport metrics;
};

DeployResult deploy(const Scenario& sc, std::span<const double> theta, std::span<const Instruction> instructions,
                    MemoryBank& bank, const std::string& session);

/// Greedy evaluation; every episode starts from its own copy of `snapshot`.
struct EvalResult {
    std::vector<Episode> episodes;
    MetricsReport metrics;
};

EvalResult evaluate(const Scenario& sc, std::span<const double> theta, std::span<const Instruction> instructions,
                    const MemoryBank& snapshot);

/// Labeled decisions along one instruction's ground-truth path.
struct Demo {
    std::string style;
    std::string instr_id;
    std::vector<Decision> decisions;
};

/// Expert demonstrations of each ground-truth path, executed in order on a
/// shared bank that starts empty. Used as the source-domain corpus.
std::vector<Demo> expert_demonstrations(const Scenario& sc, std::span<const Instruction> instructions);

}  // namespace fbnav
