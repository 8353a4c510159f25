#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fbnav/feedback.hpp"
#include "fbnav/membank.hpp"
#include "fbnav/metrics.hpp"
#include "fbnav/policy.hpp"
#include "fbnav/session.hpp"

namespace fbnav {

enum class AdaptMode { Continual, Hybrid, Entropy, None };

std::string_view to_string(AdaptMode m);
AdaptMode parse_adapt_mode(std::string_view s);

struct AdaptConfig {
    double alpha = 1e-2;
    std::size_t epochs = 10;
    std::size_t batch_size = 32;
    double replay_ratio = 1.0;  // source demonstrations per feedback sample
    double dagger_beta = 0.5;   // 1 disables the DAgger rollouts
    AdaptMode mode = AdaptMode::Continual;
    std::uint64_t seed = 0;

    /// Throws Error(InvalidArgument) on a violated invariant.
    void validate() const;
};

/// Sort key of one training pair: (style, instr_id, origin, t).
/// origin 0 = replayed tau_plus, 1 = DAgger rollout, 2 = source replay.
struct PairKey {
    std::string style;
    std::string instr_id;
    int origin = 0;
    std::size_t t = 0;

    friend auto operator<=>(const PairKey&, const PairKey&) = default;
};

struct PairSet {
    std::vector<Decision> decisions;
    std::vector<PairKey> keys;
    std::size_t dropped = 0;

    std::size_t size() const { return decisions.size(); }
    void append(PairSet other);
    /// Stable sort by key; the canonical order used before batching.
    void canonical_sort();
};

/// Replays each tau_plus on a copy of `snapshot`: MOVE(tau[t+1]) for every
/// non-final node, then STOP. A target outside the state's action set
/// drops that pair and the rest of its sample.
PairSet expand_to_pairs(const Scenario& sc, const AdaptDataset& d, const MemoryBank& snapshot);

/// One DAgger rollout per sample toward its tau_plus endpoint, on a copy of
/// `snapshot`, every visited state labeled by the shortest-path expert.
PairSet dagger_pairs(const Scenario& sc, std::span<const double> theta, const AdaptDataset& d,
                     const MemoryBank& snapshot, double beta, std::uint64_t seed);

/// round(ratio * n_samples) demonstrations drawn without replacement from
/// `source` (cycling when more are asked than exist). Keys carry the
/// demonstration's own style and id.
PairSet draw_replay(std::span<const Demo> source, std::size_t n_samples, double ratio, std::uint64_t seed);

struct IlResult {
    std::vector<double> theta;
    /// Mean NLL over all pairs before training, then after each epoch.
    std::vector<double> loss_trace;
};

/// Mini-batch SGD on nll_grad. Each epoch visits the pairs in a permutation
/// drawn from (cfg.seed, epoch); the input order is otherwise respected.
IlResult il_update(std::span<const double> theta, std::span<const Decision> pairs, const AdaptConfig& cfg);

/// Per episode, one step down the gradient of its mean action entropy,
/// restricted to the cross-feature block.
std::vector<double> entropy_baseline(std::span<const double> theta, std::span<const EpisodeStates> episodes,
                                     const FeatureSpace& space, const AdaptConfig& cfg);

/// Pairs for one adaptation update: feedback pairs (plus DAgger when
/// beta < 1) canonically sorted, then the source replay.
PairSet build_update_pairs(const Scenario& sc, std::span<const double> theta, const AdaptDataset& d,
                           const MemoryBank& snapshot, std::span<const Demo> source, const AdaptConfig& cfg,
                           std::uint64_t salt);

/// One deployment stage (a user style) with its own held-out split.
struct StageSpec {
    std::string style;
    std::size_t n_instructions = 100;
    std::size_t n_feedback = 100;
    std::size_t n_test = 100;
    std::uint64_t seed = 0;
};

struct StageSplits {
    std::vector<Instruction> deploy;
    std::vector<Instruction> test;
};

StageSplits make_stage_splits(const Scenario& sc, const StageSpec& spec);

struct StageOutcome {
    StageSpec spec;
    CollectStats stats;
    std::size_t n_samples = 0;
    std::size_t n_pairs = 0;
    std::size_t dropped = 0;
    double coverage_after = 0.0;
    AdaptDataset data;
    MetricsReport deploy;
    MetricsReport frozen;   // theta0 on the stage's held-out split
    MetricsReport adapted;  // theta after this stage's update
};

struct ContinualResult {
    std::vector<double> theta;
    std::vector<StageOutcome> stages;
};

/// Sequential updates, one per stage. Deployment shares `bank` across
/// stages; evaluation uses a copy of the bank after the stage's deployment.
ContinualResult run_continual(const Scenario& sc, std::span<const double> theta0, std::span<const StageSpec> stages,
                              std::span<const Demo> source, MemoryBank& bank, const AdaptConfig& cfg);

struct HybridResult {
    std::vector<double> theta;
    std::vector<StageOutcome> users;  // frozen/adapted left empty per user
    std::size_t n_pairs = 0;
    MetricsReport frozen;
    MetricsReport adapted;
};

/// The joint update on the union of the per-user datasets. Invariant to the
/// order of `per_user`.
IlResult hybrid_update(const Scenario& sc, std::span<const double> theta0, std::span<const AdaptDataset> per_user,
                       const MemoryBank& snapshot, std::span<const Demo> source, const AdaptConfig& cfg,
                       std::size_t* n_pairs = nullptr);

/// Every user deploys theta0 in turn on `bank`; one joint update; evaluation
/// on the concatenated held-out splits.
HybridResult run_hybrid(const Scenario& sc, std::span<const double> theta0, std::span<const StageSpec> users,
                        std::span<const Demo> source, MemoryBank& bank, const AdaptConfig& cfg);

struct EntropyResult {
    std::vector<double> theta;
    StageOutcome stage;
};

/// Deploys theta0 for the stage and applies entropy_baseline to its episodes.
EntropyResult run_entropy(const Scenario& sc, std::span<const double> theta0, const StageSpec& spec,
                          MemoryBank& bank, const AdaptConfig& cfg);

struct PretrainConfig {
    double alpha = 0.5;
    std::size_t batch_size = 32;
    std::size_t max_epochs = 40;
    std::size_t patience = 5;
    double dagger_beta = 0.5;
    std::uint64_t seed = 0;
};

struct PretrainEpoch {
    std::size_t epoch = 0;
    std::size_t n_pairs = 0;
    double loss = 0.0;
    double heldout_sr = 0.0;
};

struct PretrainResult {
    std::vector<double> theta;  // best held-out epoch
    std::vector<PretrainEpoch> curve;
    std::size_t best_epoch = 0;
};

/// Imitation from the expert demonstrations plus per-epoch DAgger rollouts
/// (fresh empty bank each epoch), stopping once held-out SR has not
/// improved for `patience` epochs.
PretrainResult pretrain(const Scenario& sc, std::span<const Instruction> train, std::span<const Instruction> heldout,
                        const PretrainConfig& cfg);

}  // namespace fbnav
