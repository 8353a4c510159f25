// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Thresholds are fixed below.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "fbnav/adapt.hpp"
#include "fbnav/harness.hpp"
#include "fbnav/rng.hpp"
#include "oracles.hpp"

using namespace fbnav;
namespace fs = std::filesystem;

namespace {

constexpr int kSeeds = 5;
constexpr std::size_t kAstarInstances = 200;
constexpr double kAstarBudgetS = 5.0;
constexpr std::size_t kGradBatches = 100;
constexpr double kGradTol = 1e-6;
constexpr double kGradBudgetS = 30.0;
constexpr std::size_t kRandomEpisodes = 1000;
constexpr double kEfficacyGain = 0.10;      // SR, absolute
constexpr double kEfficacyBudgetS = 600.0;
constexpr std::size_t kWarmEpisodes = 10;
constexpr double kContinualSlack = 0.01;    // SR, absolute
constexpr std::size_t kContinualFeedback = 300;
constexpr std::size_t kContinualTest = 1000;
constexpr double kHybridGain = 0.08;        // SR, absolute
constexpr std::size_t kHybridUsers = 5;
constexpr std::size_t kHybridSamples = 100;
const std::vector<std::string> kUsers{"userA", "userB", "userC", "userD", "userE"};

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

NodePath to_path(const EnvGraph& g, const std::vector<std::string>& ids) {
    NodePath p;
    for (const auto& id : ids) p.push_back(g.index_of(id));
    return p;
}

/// One seeded desk-scale world with a policy pretrained on the basic style.
struct SeedWorld {
    EnvGraph env;
    GeoTable geo;
    FeatureSpace space;
    StyleBook styles;
    Scenario sc;
    std::vector<double> theta0;
    std::vector<Demo> source;
    std::uint64_t seed;

    explicit SeedWorld(std::uint64_t s)
        : env(make_env(s)), geo(env), space(FeatureSpace::with_synonyms(env.landmark_vocab())), seed(s) {
        styles.emplace("basic", make_style("basic", derive_seed(s, "style/basic"), env.landmark_vocab(), 0.0));
        for (const auto& u : kUsers) {
            styles.emplace(u, make_style(u, derive_seed(s, "style/" + u), env.landmark_vocab(), 0.8));
        }
        sc.env = &env;
        sc.geo = &geo;
        sc.space = &space;
        sc.styles = &styles;
        const auto train = generate_instructions(env, styles.at("basic"), derive_seed(s, "source/train"), 300,
                                                 sc.instr_len, "basic-p");
        const auto held = generate_instructions(env, styles.at("basic"), derive_seed(s, "source/heldout"), 100,
                                                sc.instr_len, "basic-h");
        PretrainConfig pc;
        pc.seed = derive_seed(s, "pretrain");
        theta0 = pretrain(sc, train, held, pc).theta;
        source = expert_demonstrations(sc, train);
    }

    AdaptConfig adapt() const {
        AdaptConfig c;
        c.seed = derive_seed(seed, "adapt");
        return c;
    }

    StageSpec stage(const std::string& style, std::size_t n_instr, std::size_t n_fb, std::size_t n_test,
                    const std::string& tag) const {
        return {style, n_instr, n_fb, n_test, derive_seed(seed, tag + "/" + style)};
    }

private:
    static EnvGraph make_env(std::uint64_t s) {
        GeneratorParams gp;
        gp.seed = derive_seed(s, "env");
        gp.n_nodes = 60;
        gp.name = "desk60-" + std::to_string(s);
        return generate_env(gp);
    }
};

std::vector<std::unique_ptr<SeedWorld>>& worlds() {
    static std::vector<std::unique_ptr<SeedWorld>> w;
    if (w.empty()) {
        for (int s = 1; s <= kSeeds; ++s) w.push_back(std::make_unique<SeedWorld>(static_cast<std::uint64_t>(s)));
    }
    return w;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Verdict astar_vs_dijkstra() {
    const auto t0 = std::chrono::steady_clock::now();
    std::size_t mismatches = 0;
    double worst = 0.0;
    for (std::size_t k = 0; k < kAstarInstances; ++k) {
        GeneratorParams gp;
        gp.seed = derive_seed(1000, k);
        gp.n_nodes = 20 + k % 60;
        gp.model = k % 5 == 0 ? GraphModel::Grid : GraphModel::RandomGeometric;
        const EnvGraph g = generate_env(gp);
        Rng rng(derive_seed(2000, k));
        const auto a = static_cast<NodeIndex>(rng.below(g.node_count()));
        const auto b = static_cast<NodeIndex>(rng.below(g.node_count()));
        const auto path = astar_path(g, a, b);
        const double ref = oracle::dijkstra(g, a, b);
        if (!path || path_weight(g, *path) != ref) {
            ++mismatches;
            if (path) worst = std::max(worst, std::abs(path_weight(g, *path) - ref));
        }
    }
    const double secs = elapsed(t0);
    return {mismatches == 0 && secs < kAstarBudgetS,
            std::to_string(kAstarInstances) + " instances, " + std::to_string(mismatches) + " mismatches" +
                (mismatches ? " (max diff " + fmt("%.3g", worst) + ")" : "") + ", " + fmt("%.2f s", secs)};
}

Verdict gradients() {
    const auto t0 = std::chrono::steady_clock::now();
    const SeedWorld& w = *worlds().front();
    Rng rng(77);
    double worst_nll = 0.0, worst_ent = 0.0;
    bool zero_outside = true;
    for (std::size_t b = 0; b < kGradBatches; ++b) {
        // a batch of real decisions from feedback-style samples of a user style
        const auto instrs = generate_instructions(w.env, w.styles.at(kUsers[b % kUsers.size()]), derive_seed(3000, b),
                                                  4, w.sc.instr_len, "g");
        AdaptDataset d;
        for (const auto& in : instrs) d.append({in, to_path(w.env, in.gt_path), EndpointKind::Corrected, "g"});
        const auto batch = expand_to_pairs(w.sc, d, MemoryBank(w.env)).decisions;
        std::vector<double> theta = w.theta0;
        for (auto& v : theta) v += rng.uniform(-0.5, 0.5);

        std::set<std::uint32_t> active;
        std::vector<std::vector<FeatureVec>> states;
        for (const auto& dec : batch) {
            states.push_back(dec.actions);
            for (const auto& f : dec.actions) active.insert(f.begin(), f.end());
        }
        const std::vector<std::uint32_t> coords(active.begin(), active.end());
        auto restricted = [&](const std::function<double(std::span<const double>)>& f) {
            return [&, f](const std::vector<double>& x) {
                std::vector<double> t = theta;
                for (std::size_t i = 0; i < coords.size(); ++i) t[coords[i]] = x[i];
                return f(t);
            };
        };
        std::vector<double> x;
        for (auto c : coords) x.push_back(theta[c]);

        const auto gn = nll_grad(theta, batch).grad;
        const auto ge = entropy_grad(theta, states).grad;
        const auto fn = oracle::fd_gradient(restricted([&](std::span<const double> t) { return nll_grad(t, batch).loss; }), x);
        const auto fe = oracle::fd_gradient(restricted([&](std::span<const double> t) { return entropy_grad(t, states).loss; }), x);
        std::vector<double> an, ae;
        for (auto c : coords) {
            an.push_back(gn[c]);
            ae.push_back(ge[c]);
        }
        for (std::size_t i = 0; i < theta.size(); ++i) {
            if (!active.contains(static_cast<std::uint32_t>(i)) && (gn[i] != 0.0 || ge[i] != 0.0)) zero_outside = false;
        }
        worst_nll = std::max(worst_nll, oracle::max_rel_error(an, fn));
        worst_ent = std::max(worst_ent, oracle::max_rel_error(ae, fe));
    }
    const double secs = elapsed(t0);
    return {worst_nll < kGradTol && worst_ent < kGradTol && zero_outside && secs < kGradBudgetS,
            std::to_string(kGradBatches) + " batches, max rel err nll " + fmt("%.2e", worst_nll) + " entropy " +
                fmt("%.2e", worst_ent) + (zero_outside ? "" : ", nonzero grad on inactive feature") + ", " +
                fmt("%.2f s", secs)};
}

Verdict metric_goldens() {
    bool perfect_ok = true;
    {
        const EnvGraph g = generate_env(GeneratorParams{});
        const GeoTable geo(g);
        Rng rng(5);
        for (int k = 0; k < 200; ++k) {
            const auto a = static_cast<NodeIndex>(rng.below(g.node_count()));
            const auto b = static_cast<NodeIndex>(rng.below(g.node_count()));
            const NodePath p = shortest_path(g, a, b);
            const auto m = episode_metrics(p, p, b, g, geo);
            perfect_ok = perfect_ok && m.sr == 1.0 && m.spl == 1.0 && m.ndtw == 1.0 && m.sdtw == 1.0 &&
                         m.cls == 1.0 && m.ne == 0.0;
        }
    }

    // all simple paths of up to 6 nodes in a 6-node graph (2x3 grid plus one diagonal)
    std::vector<Viewpoint> nodes;
    for (int i = 0; i < 6; ++i) {
        nodes.push_back({std::string(1, static_cast<char>('a' + i)), {double(i % 3), double(i / 3), 0.0}, {"x"}});
    }
    const EnvGraph six("six", nodes, {{"a", "b"}, {"b", "c"}, {"d", "e"}, {"e", "f"}, {"a", "d"}, {"b", "e"}, {"c", "f"}, {"a", "e"}});
    const GeoTable geo6(six);
    std::vector<NodePath> paths;
    std::function<void(NodePath&)> grow = [&](NodePath& p) {
        paths.push_back(p);
        if (p.size() == 6) return;
        for (NodeIndex n : six.neighbors(p.back())) {
            if (std::find(p.begin(), p.end(), n) != p.end()) continue;
            p.push_back(n);
            grow(p);
            p.pop_back();
        }
    };
    for (NodeIndex v = 0; v < 6; ++v) {
        NodePath p{v};
        grow(p);
    }
    std::size_t dtw_bad = 0, dtw_pairs = 0;
    auto dist = [&](NodeIndex a, NodeIndex b) { return geo6(a, b); };
    for (const auto& q : paths) {
        for (const auto& r : paths) {
            ++dtw_pairs;
            if (std::abs(dtw(q, r, geo6) - oracle::brute_dtw(q, r, dist)) > 1e-9) ++dtw_bad;
        }
    }

    std::size_t bound_bad = 0;
    {
        GeneratorParams gp;
        gp.seed = 17;
        const EnvGraph g = generate_env(gp);
        const GeoTable geo(g);
        Rng rng(19);
        for (std::size_t k = 0; k < kRandomEpisodes; ++k) {
            NodePath tau{static_cast<NodeIndex>(rng.below(g.node_count()))};
            for (std::size_t s = 0, n = rng.below(15); s < n; ++s) {
                const auto nb = g.neighbors(tau.back());
                tau.push_back(nb[rng.below(nb.size())]);
            }
            const auto goal = static_cast<NodeIndex>(rng.below(g.node_count()));
            const auto m = episode_metrics(tau, shortest_path(g, tau.front(), goal), goal, g, geo);
            if (m.spl > m.sr || m.sdtw > m.ndtw) ++bound_bad;
        }
    }
    return {perfect_ok && dtw_bad == 0 && bound_bad == 0,
            std::string("perfect identities ") + (perfect_ok ? "exact" : "violated") + ", DTW " +
                std::to_string(dtw_pairs - dtw_bad) + "/" + std::to_string(dtw_pairs) + " path pairs match, bounds " +
                std::to_string(kRandomEpisodes - bound_bad) + "/" + std::to_string(kRandomEpisodes)};
}

Verdict feedback_formalism() {
    GeneratorParams gp;
    gp.n_nodes = 10;
    gp.seed = 23;
    const EnvGraph g = generate_env(gp);
    std::size_t bad = 0, pairs = 0;
    for (NodeIndex t = 0; t < g.node_count(); ++t) {
        for (NodeIndex s = 0; s < g.node_count(); ++s) {
            ++pairs;
            const auto fb = feedback_fn(t, s);
            const bool corrected = fb.kind == EndpointKind::Corrected;
            if (corrected != (t != s) || fb.endpoint != s) ++bad;
        }
    }
    bool filter_ok = true;
    for (std::size_t n = 0; n <= 20; ++n) filter_ok = filter_ok && length_filter(NodePath(n, 0)) == (n >= 5 && n <= 7);
    filter_ok = filter_ok && !length_filter(NodePath(4, 0)) && length_filter(NodePath(5, 0)) &&
                length_filter(NodePath(7, 0)) && !length_filter(NodePath(8, 0));
    return {bad == 0 && filter_ok, std::to_string(pairs - bad) + "/" + std::to_string(pairs) +
                                       " endpoint pairs correct, length filter " + (filter_ok ? "exact" : "wrong")};
}

Verdict efficacy() {
    const auto t0 = std::chrono::steady_clock::now();
    double frozen = 0, adapted = 0, entropy = 0;
    std::string per_seed;
    for (const auto& w : worlds()) {
        const StageSpec spec = w->stage("userA", 300, 300, 200, "efficacy");
        MemoryBank b1(w->env), b2(w->env);
        const auto cont = run_continual(w->sc, w->theta0, std::span(&spec, 1), w->source, b1, w->adapt());
        const auto ent = run_entropy(w->sc, w->theta0, spec, b2, w->adapt());
        const auto& so = cont.stages.front();
        frozen += so.frozen.mean.sr / kSeeds;
        adapted += so.adapted.mean.sr / kSeeds;
        entropy += ent.stage.adapted.mean.sr / kSeeds;
        per_seed += " " + fmt("%+.1f", 100.0 * (so.adapted.mean.sr - so.frozen.mean.sr));
    }
    const double secs = elapsed(t0);
    return {adapted - frozen >= kEfficacyGain && adapted > entropy && secs < kEfficacyBudgetS,
            "SR frozen " + fmt("%.1f", 100 * frozen) + " adapted " + fmt("%.1f", 100 * adapted) + " entropy " +
                fmt("%.1f", 100 * entropy) + ", gain per seed" + per_seed + ", " + fmt("%.1f s", secs)};
}

Verdict warm_start() {
    double sr_w = 0, sr_c = 0, feas_w = 0, feas_c = 0;
    bool cov_ok = true;
    std::string per_seed;
    for (const auto& w : worlds()) {
        MemoryBank session1(w->env);
        const auto s1 = make_stage_splits(w->sc, w->stage("userA", 100, 100, 1, "warm/s1"));
        deploy(w->sc, w->theta0, s1.deploy, session1, "s1");
        MemoryBank warm = parse_bank(serialize_bank(session1), w->env);
        MemoryBank cold(w->env);

        const auto s2 = make_stage_splits(w->sc, w->stage("userA", kWarmEpisodes, kWarmEpisodes, 1, "warm/s2"));
        const auto dw = deploy(w->sc, w->theta0, s2.deploy, warm, "s2");
        const auto dc = deploy(w->sc, w->theta0, s2.deploy, cold, "s2");
        sr_w += dw.metrics.mean.sr / kSeeds;
        sr_c += dc.metrics.mean.sr / kSeeds;
        feas_w += static_cast<double>(std::count(dw.online_feasible.begin(), dw.online_feasible.end(), true)) /
                  (kWarmEpisodes * kSeeds);
        feas_c += static_cast<double>(std::count(dc.online_feasible.begin(), dc.online_feasible.end(), true)) /
                  (kWarmEpisodes * kSeeds);
        cov_ok = cov_ok && dw.coverage_trace.front() > dc.coverage_trace.front();
        per_seed += " " + fmt("%.0f", 100 * dw.metrics.mean.sr) + "/" + fmt("%.0f", 100 * dc.metrics.mean.sr);
    }
    return {sr_w >= sr_c && feas_w >= feas_c && cov_ok,
            "first-10 SR warm " + fmt("%.1f", 100 * sr_w) + " cold " + fmt("%.1f", 100 * sr_c) + ", feasibility warm " +
                fmt("%.2f", feas_w) + " cold " + fmt("%.2f", feas_c) + ", coverage(ep 0) warm > cold " +
                (cov_ok ? "on every seed" : "violated") + ", SR warm/cold per seed" + per_seed};
}

Verdict coverage_trend() {
    const std::vector<std::size_t> counts{50, 100, 200, 400};
    std::vector<double> cov(counts.size()), matched(counts.size());
    for (const auto& w : worlds()) {
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const StageSpec spec = w->stage("userA", counts[i], counts[i], 1, "trend");
            const auto splits = make_stage_splits(w->sc, spec);
            MemoryBank bank(w->env);
            const auto dep = deploy(w->sc, w->theta0, splits.deploy, bank, "s1");
            std::map<std::string, NodePath> gt;
            for (const auto& in : splits.deploy) gt.emplace(in.id, to_path(w->env, in.gt_path));
            cov[i] += coverage(bank, w->env) / kSeeds;
            matched[i] += matched_path_rate(dep.data, [&](const std::string& id) -> std::optional<NodePath> {
                              const auto it = gt.find(id);
                              return it == gt.end() ? std::nullopt : std::optional<NodePath>(it->second);
                          }) / kSeeds;
        }
    }
    bool ok = true;
    std::string detail = "n/coverage/matched:";
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (i > 0) ok = ok && cov[i] >= cov[i - 1] - 1e-12 && matched[i] >= matched[i - 1] - 1e-12;
        detail += " " + std::to_string(counts[i]) + "/" + fmt("%.3f", cov[i]) + "/" + fmt("%.3f", matched[i]);
    }
    return {ok, detail};
}

Verdict continual_vs_single() {
    bool each_ok = true;
    double mean_final = 0, mean_single = 0;
    std::string per_seq;
    for (const auto& w : worlds()) {
        std::vector<std::string> pool = kUsers;
        Rng rng(derive_seed(w->seed, "sequence"));
        rng.shuffle(pool);
        std::vector<StageSpec> stages;
        for (std::size_t k = 0; k < 3; ++k) {
            stages.push_back(w->stage(pool[k], kContinualFeedback, kContinualFeedback, kContinualTest, "continual"));
        }
        MemoryBank shared(w->env), fresh(w->env);
        const auto cont = run_continual(w->sc, w->theta0, stages, w->source, shared, w->adapt());
        const auto single = run_continual(w->sc, w->theta0, std::span(&stages.back(), 1), w->source, fresh, w->adapt());
        const double f = cont.stages.back().adapted.mean.sr;
        const double s = single.stages.front().adapted.mean.sr;
        each_ok = each_ok && f >= s - kContinualSlack;
        mean_final += f / kSeeds;
        mean_single += s / kSeeds;
        per_seq += " " + fmt("%+.1f", 100.0 * (f - s));
    }
    return {each_ok && mean_final >= mean_single,
            "final SR " + fmt("%.1f", 100 * mean_final) + " single-step " + fmt("%.1f", 100 * mean_single) +
                ", margin per sequence" + per_seq};
}

Verdict hybrid() {
    double frozen = 0, adapted = 0;
    std::size_t min_samples = SIZE_MAX;
    for (const auto& w : worlds()) {
        std::vector<StageSpec> users;
        for (std::size_t u = 0; u < kHybridUsers; ++u) {
            users.push_back(w->stage(kUsers[u], 2 * kHybridSamples, kHybridSamples, 40, "hybrid"));
        }
        MemoryBank bank(w->env);
        const auto r = run_hybrid(w->sc, w->theta0, users, w->source, bank, w->adapt());
        for (const auto& so : r.users) min_samples = std::min(min_samples, so.n_samples);
        frozen += r.frozen.mean.sr / kSeeds;
        adapted += r.adapted.mean.sr / kSeeds;
    }
    return {adapted - frozen >= kHybridGain && min_samples == kHybridSamples,
            "mixed-split SR frozen " + fmt("%.1f", 100 * frozen) + " hybrid " + fmt("%.1f", 100 * adapted) +
                ", samples per user >= " + std::to_string(min_samples)};
}

std::map<std::string, std::string> csv_files(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().extension() != ".csv") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[e.path().filename().string()] = ss.str();
    }
    return out;
}

Verdict determinism() {
    const fs::path root = fs::temp_directory_path() / "fbnav_acceptance_determinism";
    fs::remove_all(root);
    RunConfig base = RunConfig::defaults();
    base.seed = 4;
    base.pretrain_instructions = 100;
    base.pretrain_heldout = 30;
    base.pretrain.max_epochs = 4;
    base.stages = {{"userA", 60, 60}, {"userB", 60, 60}};
    base.n_test = 50;
    base.ablate_instructions = {30, 60};
    base.ablate_feedback = {30};

    std::size_t compared = 0, differing = 0;
    auto run_twice = [&](const std::string& name, const std::function<void(const RunConfig&)>& cmd, RunConfig cfg) {
        cfg.out_dir = (root / (name + "_a")).string();
        cmd(cfg);
        // the second run is driven by the first run's manifest only
        RunConfig replay = load_run_config(fs::path(cfg.out_dir) / "manifest.json");
        replay.out_dir = (root / (name + "_b")).string();
        cmd(replay);
        const auto a = csv_files(cfg.out_dir), b = csv_files(replay.out_dir);
        for (const auto& [file, text] : a) {
            ++compared;
            const auto it = b.find(file);
            if (it == b.end() || it->second != text) ++differing;
        }
        return cfg;
    };
    const RunConfig pre = run_twice("pretrain", cmd_pretrain, base);
    RunConfig with_policy = base;
    with_policy.policy_path = (fs::path(pre.out_dir) / "policy.json").string();
    run_twice("deploy", cmd_deploy, with_policy);
    for (auto mode : {AdaptMode::Continual, AdaptMode::Hybrid, AdaptMode::Entropy}) {
        RunConfig c = with_policy;
        c.adapt.mode = mode;
        run_twice(std::string("adapt_") + std::string(to_string(mode)), cmd_adapt, c);
    }
    run_twice("ablate", cmd_ablate, with_policy);
    fs::remove_all(root);
    return {differing == 0 && compared > 0,
            std::to_string(compared - differing) + "/" + std::to_string(compared) + " CSV files byte-identical"};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        Verdict (*run)();
    };
    const Criterion criteria[] = {
        {"astar-matches-dijkstra", astar_vs_dijkstra},
        {"gradients-match-finite-differences", gradients},
        {"metric-goldens", metric_goldens},
        {"feedback-formalism", feedback_formalism},
        {"adaptation-efficacy", efficacy},
        {"warm-start", warm_start},
        {"coverage-matched-trend", coverage_trend},
        {"continual-vs-single-step", continual_vs_single},
        {"hybrid-efficiency", hybrid},
        {"determinism", determinism},
    };
    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        if (!v.pass) ++failed;
        std::printf("%s %2d %s: %s\n", v.pass ? "PASS" : "FAIL", index, c.name, v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
