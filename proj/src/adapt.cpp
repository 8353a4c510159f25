#include "fbnav/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fbnav/rng.hpp"

namespace fbnav {

std::string_view to_string(AdaptMode m) {
    switch (m) {
        case AdaptMode::Continual: return "continual";
        case AdaptMode::Hybrid: return "hybrid";
        case AdaptMode::Entropy: return "entropy";
        case AdaptMode::None: return "none";
    }
    return "?";
}

AdaptMode parse_adapt_mode(std::string_view s) {
    if (s == "continual") return AdaptMode::Continual;
    if (s == "hybrid") return AdaptMode::Hybrid;
    if (s == "entropy" || s == "entropy-baseline") return AdaptMode::Entropy;
    if (s == "none" || s == "frozen") return AdaptMode::None;
    throw Error(ErrorCode::InvalidArgument, "unknown adaptation mode '" + std::string(s) + "'");
}

void AdaptConfig::validate() const {
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    if (!(replay_ratio >= 0.0)) throw Error(ErrorCode::InvalidArgument, "replay_ratio must be non-negative");
    if (!(dagger_beta >= 0.0 && dagger_beta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "dagger_beta must lie in [0,1]");
    if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be positive");
}

void PairSet::append(PairSet other) {
    decisions.insert(decisions.end(), std::make_move_iterator(other.decisions.begin()),
                     std::make_move_iterator(other.decisions.end()));
    keys.insert(keys.end(), std::make_move_iterator(other.keys.begin()), std::make_move_iterator(other.keys.end()));
    dropped += other.dropped;
}

void PairSet::canonical_sort() {
    std::vector<std::size_t> order(keys.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
    PairSet sorted;
    sorted.dropped = dropped;
    for (std::size_t i : order) {
        sorted.decisions.push_back(std::move(decisions[i]));
        sorted.keys.push_back(std::move(keys[i]));
    }
    *this = std::move(sorted);
}

PairSet expand_to_pairs(const Scenario& sc, const AdaptDataset& d, const MemoryBank& snapshot) {
    PairSet out;
    for (const auto& sample : d.samples()) {
        const NodePath& tau = sample.tau_plus;
        if (tau.empty()) continue;
        const Task task(sample.instruction, style_of(*sc.styles, sample.instruction), *sc.env, *sc.space);
        MemoryBank bank = snapshot;
        NavState s = initial_state(task, bank);
        for (std::size_t t = 0; t < tau.size(); ++t) {
            const NavAction a = t + 1 < tau.size() ? NavAction::move(tau[t + 1]) : NavAction::stop();
            if (!is_valid(s, a)) {
                out.dropped += tau.size() - t;
                break;
            }
            out.decisions.push_back(make_decision(s, a));
            out.keys.push_back({sample.instruction.style, sample.instruction.id, 0, t});
            if (!a.is_stop()) advance(s, a.target, bank, 1);
        }
    }
    return out;
}

PairSet dagger_pairs(const Scenario& sc, std::span<const double> theta, const AdaptDataset& d,
                     const MemoryBank& snapshot, double beta, std::uint64_t seed) {
    PairSet out;
    for (const auto& sample : d.samples()) {
        if (sample.tau_plus.empty()) continue;
        const Task task(sample.instruction, style_of(*sc.styles, sample.instruction), *sc.env, *sc.space);
        MemoryBank bank = snapshot;
        auto roll = dagger_rollout(theta, task, bank, sample.tau_plus.back(), *sc.geo, beta, seed, sc.t_max);
        for (std::size_t t = 0; t < roll.decisions.size(); ++t) {
            out.decisions.push_back(std::move(roll.decisions[t]));
            out.keys.push_back({sample.instruction.style, sample.instruction.id, 1, t});
        }
    }
    return out;
}

PairSet draw_replay(std::span<const Demo> source, std::size_t n_samples, double ratio, std::uint64_t seed) {
    PairSet out;
    const auto want = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n_samples)));
    if (want == 0 || source.empty()) return out;
    std::vector<std::size_t> order(source.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "replay"));
    rng.shuffle(order);
    for (std::size_t k = 0; k < want; ++k) {
        const Demo& demo = source[order[k % order.size()]];
        for (std::size_t t = 0; t < demo.decisions.size(); ++t) {
            out.decisions.push_back(demo.decisions[t]);
            out.keys.push_back({demo.style, demo.instr_id, 2, t});
        }
    }
    return out;
}

namespace {

double mean_nll(std::span<const double> theta, std::span<const Decision> pairs) {
    double loss = 0.0;
    for (const auto& d : pairs) {
        const auto p = action_dist(theta, d.actions);
        loss -= std::log(std::max(p[d.label], 1e-300));
    }
    return pairs.empty() ? 0.0 : loss / static_cast<double>(pairs.size());
}

}  // namespace

IlResult il_update(std::span<const double> theta, std::span<const Decision> pairs, const AdaptConfig& cfg) {
    if (cfg.batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be positive");
    IlResult out;
    out.theta.assign(theta.begin(), theta.end());
    out.loss_trace.push_back(mean_nll(out.theta, pairs));
    if (pairs.empty()) return out;

    std::vector<std::size_t> order(pairs.size());
    std::vector<Decision> batch;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng rng(derive_seed(cfg.seed, "il/" + std::to_string(epoch)));
        rng.shuffle(order);
        for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
            const std::size_t hi = std::min(order.size(), lo + cfg.batch_size);
            batch.clear();
            for (std::size_t k = lo; k < hi; ++k) batch.push_back(pairs[order[k]]);
            const auto g = nll_grad(out.theta, batch);
            for (std::size_t i = 0; i < out.theta.size(); ++i) out.theta[i] -= cfg.alpha * g.grad[i];
        }
        out.loss_trace.push_back(mean_nll(out.theta, pairs));
    }
    return out;
}

std::vector<double> entropy_baseline(std::span<const double> theta, std::span<const EpisodeStates> episodes,
                                     const FeatureSpace& space, const AdaptConfig& cfg) {
    std::vector<double> out(theta.begin(), theta.end());
    const std::size_t cross = space.cross_size();
    for (const auto& states : episodes) {
        if (states.empty()) continue;
        const auto g = entropy_grad(out, states);
        for (std::size_t i = 0; i < cross; ++i) out[i] -= cfg.alpha * g.grad[i];
    }
    return out;
}

PairSet build_update_pairs(const Scenario& sc, std::span<const double> theta, const AdaptDataset& d,
                           const MemoryBank& snapshot, std::span<const Demo> source, const AdaptConfig& cfg,
                           std::uint64_t salt) {
    PairSet pairs = expand_to_pairs(sc, d, snapshot);
    if (cfg.dagger_beta < 1.0) {
        pairs.append(dagger_pairs(sc, theta, d, snapshot, cfg.dagger_beta, derive_seed(cfg.seed, salt)));
    }
    pairs.canonical_sort();
    pairs.append(draw_replay(source, d.size(), cfg.replay_ratio, derive_seed(cfg.seed, salt + 1)));
    return pairs;
}

StageSplits make_stage_splits(const Scenario& sc, const StageSpec& spec) {
    const StyleMap& style = sc.styles->at(spec.style);
    StageSplits out;
    out.deploy = generate_instructions(*sc.env, style, derive_seed(spec.seed, "deploy"), spec.n_instructions,
                                       sc.instr_len, spec.style + "-d");
    out.test = generate_instructions(*sc.env, style, derive_seed(spec.seed, "test"), spec.n_test, sc.instr_len,
                                     spec.style + "-t");
    return out;
}

namespace {

AdaptConfig stage_config(const AdaptConfig& cfg, std::size_t stage) {
    AdaptConfig c = cfg;
    c.seed = derive_seed(cfg.seed, "stage/" + std::to_string(stage));
    return c;
}

}  // namespace

ContinualResult run_continual(const Scenario& sc, std::span<const double> theta0, std::span<const StageSpec> stages,
                              std::span<const Demo> source, MemoryBank& bank, const AdaptConfig& cfg) {
    cfg.validate();
    ContinualResult out;
    out.theta.assign(theta0.begin(), theta0.end());
    for (std::size_t k = 0; k < stages.size(); ++k) {
        const StageSpec& spec = stages[k];
        const AdaptConfig c = stage_config(cfg, k);
        const auto splits = make_stage_splits(sc, spec);

        StageOutcome so;
        so.spec = spec;
        auto dep = deploy(sc, out.theta, splits.deploy, bank, "stage" + std::to_string(k + 1));
        so.stats = dep.stats;
        so.deploy = std::move(dep.metrics);
        so.data = dep.data.head(spec.n_feedback);
        so.n_samples = so.data.size();
        so.coverage_after = coverage(bank, *sc.env);

        const PairSet pairs = build_update_pairs(sc, out.theta, so.data, bank, source, c, 0);
        so.n_pairs = pairs.size();
        so.dropped = pairs.dropped;
        out.theta = il_update(out.theta, pairs.decisions, c).theta;

        so.frozen = evaluate(sc, theta0, splits.test, bank).metrics;
        so.adapted = evaluate(sc, out.theta, splits.test, bank).metrics;
        out.stages.push_back(std::move(so));
    }
    return out;
}

IlResult hybrid_update(const Scenario& sc, std::span<const double> theta0, std::span<const AdaptDataset> per_user,
                       const MemoryBank& snapshot, std::span<const Demo> source, const AdaptConfig& cfg,
                       std::size_t* n_pairs) {
    AdaptDataset joint;
    for (const auto& d : per_user) joint.append(d);
    const PairSet pairs = build_update_pairs(sc, theta0, joint, snapshot, source, cfg, 0);
    if (n_pairs != nullptr) *n_pairs = pairs.size();
    return il_update(theta0, pairs.decisions, cfg);
}

HybridResult run_hybrid(const Scenario& sc, std::span<const double> theta0, std::span<const StageSpec> users,
                        std::span<const Demo> source, MemoryBank& bank, const AdaptConfig& cfg) {
    cfg.validate();
    HybridResult out;
    std::vector<AdaptDataset> per_user;
    std::vector<Instruction> mixed_test;
    for (std::size_t u = 0; u < users.size(); ++u) {
        const auto splits = make_stage_splits(sc, users[u]);
        StageOutcome so;
        so.spec = users[u];
        auto dep = deploy(sc, theta0, splits.deploy, bank, "user" + std::to_string(u + 1));
        so.stats = dep.stats;
        so.deploy = std::move(dep.metrics);
        so.data = dep.data.head(users[u].n_feedback);
        so.n_samples = so.data.size();
        per_user.push_back(so.data);
        mixed_test.insert(mixed_test.end(), splits.test.begin(), splits.test.end());
        out.users.push_back(std::move(so));
    }
    for (auto& so : out.users) so.coverage_after = coverage(bank, *sc.env);

    out.theta = hybrid_update(sc, theta0, per_user, bank, source, stage_config(cfg, 0), &out.n_pairs).theta;
    out.frozen = evaluate(sc, theta0, mixed_test, bank).metrics;
    out.adapted = evaluate(sc, out.theta, mixed_test, bank).metrics;
    return out;
}

EntropyResult run_entropy(const Scenario& sc, std::span<const double> theta0, const StageSpec& spec,
                          MemoryBank& bank, const AdaptConfig& cfg) {
    cfg.validate();
    EntropyResult out;
    const auto splits = make_stage_splits(sc, spec);
    out.stage.spec = spec;
    auto dep = deploy(sc, theta0, splits.deploy, bank, "stage1");
    out.stage.stats = dep.stats;
    out.stage.deploy = std::move(dep.metrics);
    out.stage.coverage_after = coverage(bank, *sc.env);
    out.theta = entropy_baseline(theta0, dep.states, *sc.space, cfg);
    out.stage.frozen = evaluate(sc, theta0, splits.test, bank).metrics;
    out.stage.adapted = evaluate(sc, out.theta, splits.test, bank).metrics;
    return out;
}

PretrainResult pretrain(const Scenario& sc, std::span<const Instruction> train, std::span<const Instruction> heldout,
                        const PretrainConfig& cfg) {
    if (cfg.max_epochs == 0) throw Error(ErrorCode::InvalidArgument, "max_epochs must be positive");
    const auto demos = expert_demonstrations(sc, train);
    std::vector<Decision> base;
    for (const auto& demo : demos) base.insert(base.end(), demo.decisions.begin(), demo.decisions.end());

    PretrainResult out;
    std::vector<double> theta(sc.space->size(), 0.0);
    out.theta = theta;
    double best_sr = -1.0;
    std::size_t since_best = 0;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const std::uint64_t eseed = derive_seed(cfg.seed, "pretrain/" + std::to_string(epoch));
        std::vector<Decision> data = base;
        MemoryBank bank(*sc.env);
        for (const auto& instr : train) {
            const Task task(instr, style_of(*sc.styles, instr), *sc.env, *sc.space);
            auto roll = dagger_rollout(theta, task, bank, task.goal(), *sc.geo, cfg.dagger_beta, eseed, sc.t_max);
            for (auto& d : roll.decisions) data.push_back(std::move(d));
        }
        AdaptConfig il;
        il.alpha = cfg.alpha;
        il.epochs = 1;
        il.batch_size = cfg.batch_size;
        il.seed = eseed;
        auto res = il_update(theta, data, il);
        theta = std::move(res.theta);

        const double sr = evaluate(sc, theta, heldout, bank).metrics.mean.sr;
        out.curve.push_back({epoch, data.size(), res.loss_trace.back(), sr});
        if (sr > best_sr) {
            best_sr = sr;
            out.theta = theta;
            out.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    return out;
}

}  // namespace fbnav
