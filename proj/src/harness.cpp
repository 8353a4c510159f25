#include "fbnav/harness.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fbnav/rng.hpp"

namespace fbnav {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int kManifestVersion = 1;

void check_keys(const nlohmann::json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!j.is_object()) throw Error(ErrorCode::Schema, where + " must be an object");
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw Error(ErrorCode::Schema, "unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

LengthRange read_range(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::Schema, what + " must be [min, max]");
    return {j[0].get<std::size_t>(), j[1].get<std::size_t>()};
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

EnvGraph build_env(const RunConfig& cfg) {
    if (!cfg.env_path.empty()) return load_env(cfg.env_path);
    GeneratorParams gp;
    gp.seed = derive_seed(cfg.seed, "env");
    gp.n_nodes = cfg.env_nodes;
    gp.model = cfg.env_model;
    gp.name = cfg.env_name;
    return generate_env(gp);
}

/// Collects output paths and writes manifest.json last.
class Run {
public:
    Run(const RunConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
        fs::create_directories(cfg.out_dir);
    }

    fs::path file(const std::string& key, const std::string& name) {
        const fs::path p = fs::path(cfg_.out_dir) / name;
        outputs_[key] = p.string();
        return p;
    }

    void note(const std::string& key, ojson value) { notes_[key] = std::move(value); }

    void finish() {
        ojson m;
        m["version"] = kManifestVersion;
        m["command"] = command_;
        m["config"] = to_json(cfg_);
        m["outputs"] = outputs_;
        if (!notes_.empty()) m["notes"] = notes_;
        write_text(fs::path(cfg_.out_dir) / "manifest.json", m.dump(2) + "\n");
    }

private:
    const RunConfig& cfg_;
    std::string command_;
    ojson outputs_ = ojson::object();
    ojson notes_ = ojson::object();
};

PretrainConfig pretrain_config(const RunConfig& cfg) {
    PretrainConfig pc = cfg.pretrain;
    pc.seed = derive_seed(cfg.seed, "pretrain");
    return pc;
}

AdaptConfig adapt_config(const RunConfig& cfg) {
    AdaptConfig ac = cfg.adapt;
    ac.seed = derive_seed(cfg.seed, "adapt");
    return ac;
}

/// The policy named by the config, or a fresh in-process pretraining.
std::vector<double> base_policy(const RunConfig& cfg, const World& w, Run& run) {
    if (!cfg.policy_path.empty()) {
        const PolicyParams p = load_policy(cfg.policy_path);
        if (!(p.space == w.space())) {
            throw Error(ErrorCode::Schema, "policy feature space does not match environment '" + w.env().name() + "'");
        }
        run.note("policy", cfg.policy_path);
        return p.theta;
    }
    run.note("policy", "pretrained in-process");
    return pretrain(w.scenario(), w.source_train(), w.source_heldout(), pretrain_config(cfg)).theta;
}

void save_theta(const World& w, std::vector<double> theta, double alpha, const fs::path& p) {
    PolicyParams params;
    params.space = w.space();
    params.theta = std::move(theta);
    params.alpha = alpha;
    save_policy(params, p);
}

std::string stats_header() {
    return "phase,style,episodes,confirmed,corrected,infeasible,rejected,kept,samples,pairs,dropped,coverage\n";
}

std::string stats_row(const std::string& phase, const StageOutcome& so) {
    const auto& s = so.stats;
    std::ostringstream o;
    o << phase << ',' << so.spec.style << ',' << s.episodes << ',' << s.confirmed << ',' << s.corrected << ','
      << s.infeasible << ',' << s.rejected << ',' << s.kept << ',' << so.n_samples << ',' << so.n_pairs << ','
      << so.dropped << ',' << fmt("%.4f", so.coverage_after) << '\n';
    return o.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

RunConfig RunConfig::defaults() {
    RunConfig c;
    c.styles = {{"basic", 0.0}, {"userA", 0.8}, {"userB", 0.8}, {"userC", 0.8}, {"userD", 0.8}, {"userE", 0.8}};
    c.stages = {{"userA", 300, 300}, {"userB", 300, 300}, {"userC", 300, 300}};
    return c;
}

void RunConfig::validate() const {
    auto positive = [](std::size_t v, const char* what) {
        if (v == 0) throw Error(ErrorCode::InvalidArgument, std::string(what) + " must be positive");
    };
    positive(env_nodes, "env nodes");
    positive(pretrain_instructions, "pretrain instructions");
    positive(pretrain_heldout, "pretrain heldout");
    positive(n_test, "n_test");
    positive(t_max, "t_max");
    if (!(d_th > 0.0)) throw Error(ErrorCode::InvalidArgument, "d_th must be positive");
    if (instr_len.min == 0 || instr_len.min > instr_len.max) throw Error(ErrorCode::InvalidArgument, "bad instruction length range");
    if (filter.min > filter.max) throw Error(ErrorCode::InvalidArgument, "bad length filter");
    std::set<std::string> ids;
    for (const auto& s : styles) {
        if (!ids.insert(s.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate style '" + s.id + "'");
        if (!(s.synonym_rate >= 0.0 && s.synonym_rate <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "synonym_rate of '" + s.id + "' outside [0,1]");
        }
    }
    if (!ids.contains(source_style)) throw Error(ErrorCode::InvalidArgument, "unknown source style '" + source_style + "'");
    if (stages.empty()) throw Error(ErrorCode::InvalidArgument, "at least one stage is required");
    for (const auto& st : stages) {
        if (!ids.contains(st.style)) throw Error(ErrorCode::InvalidArgument, "unknown stage style '" + st.style + "'");
        positive(st.n_instructions, "stage n_instructions");
        positive(st.n_feedback, "stage n_feedback");
    }
    for (std::size_t v : ablate_instructions) positive(v, "ablation instruction count");
    for (std::size_t v : ablate_feedback) positive(v, "ablation feedback count");
    adapt.validate();
    if (!(pretrain.alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "pretrain alpha must be positive");
    if (!policy_path.empty() && !fs::exists(policy_path)) throw Error(ErrorCode::Io, "policy file not found: " + policy_path);
    if (!warm_start.empty() && !fs::exists(warm_start)) throw Error(ErrorCode::Io, "warm-start bank not found: " + warm_start);
    if (!env_path.empty() && !fs::exists(env_path)) throw Error(ErrorCode::Io, "env file not found: " + env_path);
}

ojson to_json(const RunConfig& c) {
    ojson j;
    j["seed"] = c.seed;
    j["env"] = {{"path", c.env_path}, {"nodes", c.env_nodes}, {"model", to_string(c.env_model)}, {"name", c.env_name}};
    auto styles = ojson::array();
    for (const auto& s : c.styles) styles.push_back({{"id", s.id}, {"synonym_rate", s.synonym_rate}});
    j["styles"] = std::move(styles);
    j["source_style"] = c.source_style;
    j["pretrain"] = {{"instructions", c.pretrain_instructions}, {"heldout", c.pretrain_heldout},
                     {"alpha", c.pretrain.alpha},          {"batch_size", c.pretrain.batch_size},
                     {"max_epochs", c.pretrain.max_epochs},  {"patience", c.pretrain.patience},
                     {"dagger_beta", c.pretrain.dagger_beta}};
    auto stages = ojson::array();
    for (const auto& s : c.stages) {
        stages.push_back({{"style", s.style}, {"n_instructions", s.n_instructions}, {"n_feedback", s.n_feedback}});
    }
    j["stages"] = std::move(stages);
    j["n_test"] = c.n_test;
    j["adapt"] = {{"mode", to_string(c.adapt.mode)},    {"alpha", c.adapt.alpha},
                  {"epochs", c.adapt.epochs},           {"batch_size", c.adapt.batch_size},
                  {"replay_ratio", c.adapt.replay_ratio}, {"dagger_beta", c.adapt.dagger_beta}};
    j["ablate"] = {{"instructions", c.ablate_instructions}, {"feedback", c.ablate_feedback}};
    j["t_max"] = c.t_max;
    j["d_th"] = c.d_th;
    j["instr_len"] = {c.instr_len.min, c.instr_len.max};
    j["length_filter"] = {c.filter.min, c.filter.max};
    j["policy"] = c.policy_path;
    j["warm_start"] = c.warm_start;
    j["out"] = c.out_dir;
    return j;
}

RunConfig parse_run_config(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Parse, std::string("config: ") + e.what());
    }
    if (doc.is_object() && doc.contains("config") && doc.contains("command")) doc = doc.at("config");

    RunConfig c = RunConfig::defaults();
    try {
        check_keys(doc,
                   {"seed", "env", "styles", "source_style", "pretrain", "stages", "n_test", "adapt", "ablate", "t_max",
                    "d_th", "instr_len", "length_filter", "policy", "warm_start", "out"},
                   "config");
        read_opt(doc, "seed", c.seed);
        if (doc.contains("env")) {
            const auto& e = doc.at("env");
            check_keys(e, {"path", "nodes", "model", "name"}, "env");
            read_opt(e, "path", c.env_path);
            read_opt(e, "nodes", c.env_nodes);
            read_opt(e, "name", c.env_name);
            if (e.contains("model")) {
                const auto m = parse_graph_model(e.at("model").get<std::string>());
                if (!m) throw Error(ErrorCode::Schema, "unknown env model '" + e.at("model").get<std::string>() + "'");
                c.env_model = *m;
            }
        }
        if (doc.contains("styles")) {
            c.styles.clear();
            for (const auto& s : doc.at("styles")) {
                check_keys(s, {"id", "synonym_rate"}, "style");
                c.styles.push_back({s.at("id").get<std::string>(), s.value("synonym_rate", 0.0)});
            }
        }
        read_opt(doc, "source_style", c.source_style);
        if (doc.contains("pretrain")) {
            const auto& p = doc.at("pretrain");
            check_keys(p, {"instructions", "heldout", "alpha", "batch_size", "max_epochs", "patience", "dagger_beta"},
                       "pretrain");
            read_opt(p, "instructions", c.pretrain_instructions);
            read_opt(p, "heldout", c.pretrain_heldout);
            read_opt(p, "alpha", c.pretrain.alpha);
            read_opt(p, "batch_size", c.pretrain.batch_size);
            read_opt(p, "max_epochs", c.pretrain.max_epochs);
            read_opt(p, "patience", c.pretrain.patience);
            read_opt(p, "dagger_beta", c.pretrain.dagger_beta);
        }
        if (doc.contains("stages")) {
            c.stages.clear();
            for (const auto& s : doc.at("stages")) {
                check_keys(s, {"style", "n_instructions", "n_feedback"}, "stage");
                StageCount st;
                st.style = s.at("style").get<std::string>();
                read_opt(s, "n_instructions", st.n_instructions);
                st.n_feedback = s.value("n_feedback", st.n_instructions);
                c.stages.push_back(st);
            }
        }
        read_opt(doc, "n_test", c.n_test);
        if (doc.contains("adapt")) {
            const auto& a = doc.at("adapt");
            check_keys(a, {"mode", "alpha", "epochs", "batch_size", "replay_ratio", "dagger_beta"}, "adapt");
            if (a.contains("mode")) c.adapt.mode = parse_adapt_mode(a.at("mode").get<std::string>());
            read_opt(a, "alpha", c.adapt.alpha);
            read_opt(a, "epochs", c.adapt.epochs);
            read_opt(a, "batch_size", c.adapt.batch_size);
            read_opt(a, "replay_ratio", c.adapt.replay_ratio);
            read_opt(a, "dagger_beta", c.adapt.dagger_beta);
        }
        if (doc.contains("ablate")) {
            const auto& a = doc.at("ablate");
            check_keys(a, {"instructions", "feedback"}, "ablate");
            read_opt(a, "instructions", c.ablate_instructions);
            read_opt(a, "feedback", c.ablate_feedback);
        }
        read_opt(doc, "t_max", c.t_max);
        read_opt(doc, "d_th", c.d_th);
        if (doc.contains("instr_len")) c.instr_len = read_range(doc.at("instr_len"), "instr_len");
        if (doc.contains("length_filter")) c.filter = read_range(doc.at("length_filter"), "length_filter");
        read_opt(doc, "policy", c.policy_path);
        read_opt(doc, "warm_start", c.warm_start);
        read_opt(doc, "out", c.out_dir);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Schema, std::string("config: ") + e.what());
    }
    return c;
}

RunConfig load_run_config(const fs::path& path) { return parse_run_config(read_text(path)); }

// ---------------------------------------------------------------------------

World::World(const RunConfig& cfg)
    : cfg_(cfg), env_(build_env(cfg)), geo_(env_), space_(FeatureSpace::with_synonyms(env_.landmark_vocab())) {
    for (const auto& s : cfg.styles) {
        styles_.emplace(s.id, make_style(s.id, derive_seed(cfg.seed, "style/" + s.id), env_.landmark_vocab(),
                                         s.synonym_rate));
    }
    scenario_ = Scenario{&env_, &geo_, &space_, &styles_, cfg.t_max, cfg.d_th, cfg.filter, cfg.instr_len};
}

std::vector<Instruction> World::source_train() const {
    return generate_instructions(env_, styles_.at(cfg_.source_style), derive_seed(cfg_.seed, "source/train"),
                                 cfg_.pretrain_instructions, cfg_.instr_len, cfg_.source_style + "-p");
}

std::vector<Instruction> World::source_heldout() const {
    return generate_instructions(env_, styles_.at(cfg_.source_style), derive_seed(cfg_.seed, "source/heldout"),
                                 cfg_.pretrain_heldout, cfg_.instr_len, cfg_.source_style + "-h");
}

std::vector<Demo> World::source_corpus() const { return expert_demonstrations(scenario_, source_train()); }

StageSpec World::stage_spec(const StageCount& s, std::size_t index) const {
    StageSpec spec;
    spec.style = s.style;
    spec.n_instructions = s.n_instructions;
    spec.n_feedback = s.n_feedback;
    spec.n_test = cfg_.n_test;
    spec.seed = derive_seed(cfg_.seed, "stage/" + std::to_string(index) + "/" + s.style);
    return spec;
}

// ---------------------------------------------------------------------------

void cmd_pretrain(const RunConfig& cfg) {
    cfg.validate();
    const World w(cfg);
    Run run(cfg, "pretrain");
    save_env(w.env(), run.file("env", "env.json"));

    const auto heldout = w.source_heldout();
    const auto res = pretrain(w.scenario(), w.source_train(), heldout, pretrain_config(cfg));
    save_theta(w, res.theta, cfg.pretrain.alpha, run.file("policy", "policy.json"));

    std::string curve = "epoch,pairs,loss,heldout_SR\n";
    for (const auto& e : res.curve) {
        curve += std::to_string(e.epoch) + "," + std::to_string(e.n_pairs) + "," + fmt("%.6f", e.loss) + "," +
                 fmt("%.2f", 100.0 * e.heldout_sr) + "\n";
    }
    write_text(run.file("curve", "pretrain_curve.csv"), curve);

    MemoryBank bank(w.env());
    const auto eval = evaluate(w.scenario(), res.theta, heldout, bank);
    write_results_csv({{w.env().name(), "pretrain-heldout", cfg.source_style, eval.metrics}},
                      run.file("results", "results.csv"));
    run.note("best_epoch", res.best_epoch);
    run.finish();
}

void cmd_deploy(const RunConfig& cfg) {
    cfg.validate();
    const World w(cfg);
    Run run(cfg, "deploy");
    save_env(w.env(), run.file("env", "env.json"));
    const auto theta = base_policy(cfg, w, run);

    MemoryBank bank = cfg.warm_start.empty() ? MemoryBank(w.env()) : load_bank(cfg.warm_start, w.env());
    const StageSpec spec = w.stage_spec(cfg.stages.front(), 0);
    const auto splits = make_stage_splits(w.scenario(), spec);
    write_instructions(splits.deploy, run.file("instructions", "instructions.jsonl"));
    const auto dep = deploy(w.scenario(), theta, splits.deploy, bank, "s1");

    write_episodes(dep.episodes, w.env(), run.file("episodes", "episodes.jsonl"));
    save_bank(bank, run.file("bank", "bank.json"));
    write_dataset(dep.data.head(spec.n_feedback), w.env(), run.file("dataset", "dataset.jsonl"));

    std::string cov = "episode,coverage,lift_feasible\n";
    for (std::size_t i = 0; i < dep.coverage_trace.size(); ++i) {
        cov += std::to_string(i) + "," + fmt("%.6f", dep.coverage_trace[i]) + "," +
               (dep.online_feasible[i] ? "1" : "0") + "\n";
    }
    write_text(run.file("coverage", "coverage.csv"), cov);

    StageOutcome so;
    so.spec = spec;
    so.stats = dep.stats;
    so.n_samples = std::min(dep.data.size(), spec.n_feedback);
    so.coverage_after = coverage(bank, w.env());
    write_text(run.file("stats", "stats.csv"), stats_header() + stats_row("deploy", so));
    write_results_csv({{w.env().name(), "deploy", spec.style, dep.metrics}}, run.file("results", "results.csv"));
    run.note("warm_start", !cfg.warm_start.empty());
    run.finish();
}

void cmd_adapt(const RunConfig& cfg) {
    cfg.validate();
    const World w(cfg);
    Run run(cfg, "adapt");
    save_env(w.env(), run.file("env", "env.json"));
    const auto theta0 = base_policy(cfg, w, run);
    const AdaptConfig ac = adapt_config(cfg);
    const std::string env = w.env().name();

    std::vector<StageSpec> specs;
    for (std::size_t k = 0; k < cfg.stages.size(); ++k) specs.push_back(w.stage_spec(cfg.stages[k], k));

    MemoryBank bank(w.env());
    std::vector<ResultRow> rows;
    std::string stats = stats_header();
    std::vector<double> theta = theta0;

    switch (cfg.adapt.mode) {
        case AdaptMode::Continual: {
            const auto res = run_continual(w.scenario(), theta0, specs, w.source_corpus(), bank, ac);
            for (std::size_t k = 0; k < res.stages.size(); ++k) {
                const auto& so = res.stages[k];
                const std::string phase = "stage" + std::to_string(k + 1);
                write_dataset(so.data, w.env(), run.file("dataset_" + phase, "dataset_" + phase + ".jsonl"));
                rows.push_back({env, "frozen", so.spec.style, so.frozen});
                rows.push_back({env, phase, so.spec.style, so.adapted});
                stats += stats_row(phase, so);
            }
            theta = res.theta;
            break;
        }
        case AdaptMode::Hybrid: {
            const auto res = run_hybrid(w.scenario(), theta0, specs, w.source_corpus(), bank, ac);
            for (std::size_t u = 0; u < res.users.size(); ++u) {
                const std::string phase = "user" + std::to_string(u + 1);
                write_dataset(res.users[u].data, w.env(), run.file("dataset_" + phase, "dataset_" + phase + ".jsonl"));
                StageOutcome so = res.users[u];
                if (u == 0) so.n_pairs = res.n_pairs;
                stats += stats_row(phase, so);
            }
            rows.push_back({env, "frozen", "mixed", res.frozen});
            rows.push_back({env, "hybrid", "mixed", res.adapted});
            theta = res.theta;
            break;
        }
        case AdaptMode::Entropy: {
            const auto res = run_entropy(w.scenario(), theta0, specs.front(), bank, ac);
            rows.push_back({env, "frozen", res.stage.spec.style, res.stage.frozen});
            rows.push_back({env, "entropy", res.stage.spec.style, res.stage.adapted});
            stats += stats_row("stage1", res.stage);
            theta = res.theta;
            break;
        }
        case AdaptMode::None: {
            for (std::size_t k = 0; k < specs.size(); ++k) {
                const auto splits = make_stage_splits(w.scenario(), specs[k]);
                const auto dep = deploy(w.scenario(), theta0, splits.deploy, bank, "stage" + std::to_string(k + 1));
                rows.push_back({env, "frozen", specs[k].style, evaluate(w.scenario(), theta0, splits.test, bank).metrics});
                StageOutcome so;
                so.spec = specs[k];
                so.stats = dep.stats;
                so.coverage_after = coverage(bank, w.env());
                stats += stats_row("stage" + std::to_string(k + 1), so);
            }
            break;
        }
    }

    save_theta(w, theta, cfg.adapt.alpha, run.file("policy", "policy_adapted.json"));
    save_bank(bank, run.file("bank", "bank.json"));
    write_text(run.file("stats", "stats.csv"), stats);
    write_results_csv(rows, run.file("results", "results.csv"));
    run.finish();
}

void cmd_ablate(const RunConfig& cfg) {
    cfg.validate();
    const World w(cfg);
    Run run(cfg, "ablate");
    save_env(w.env(), run.file("env", "env.json"));
    const auto theta0 = base_policy(cfg, w, run);
    const auto source = w.source_corpus();
    const AdaptConfig ac = adapt_config(cfg);

    std::string csv = std::string("n_instr,n_fb,coverage,matched_path_rate,") + kResultsHeader + "\n";
    for (std::size_t n_instr : cfg.ablate_instructions) {
        for (std::size_t n_fb : cfg.ablate_feedback) {
            if (n_fb > n_instr) continue;
            StageSpec spec = w.stage_spec({cfg.stages.front().style, n_instr, n_fb}, 0);
            MemoryBank bank(w.env());
            const auto res = run_continual(w.scenario(), theta0, std::span(&spec, 1), source, bank, ac);
            const auto& so = res.stages.front();
            const auto splits = make_stage_splits(w.scenario(), spec);
            std::map<std::string, NodePath> gt;
            for (const auto& instr : splits.deploy) {
                NodePath p;
                for (const auto& id : instr.gt_path) p.push_back(w.env().index_of(id));
                gt.emplace(instr.id, std::move(p));
            }
            const double matched = matched_path_rate(so.data, [&](const std::string& id) -> std::optional<NodePath> {
                const auto it = gt.find(id);
                return it == gt.end() ? std::nullopt : std::optional<NodePath>(it->second);
            });
            const std::string prefix = std::to_string(n_instr) + "," + std::to_string(n_fb) + "," +
                                       fmt("%.4f", so.coverage_after) + "," + fmt("%.4f", matched) + ",";
            csv += prefix + format_result_row({w.env().name(), "frozen", spec.style, so.frozen}) + "\n";
            csv += prefix + format_result_row({w.env().name(), "adapted", spec.style, so.adapted}) + "\n";
        }
    }
    write_text(run.file("ablation", "ablation.csv"), csv);
    run.finish();
}

void cmd_report(const fs::path& run_dir) {
    const fs::path results = run_dir / "results.csv";
    if (!fs::exists(results)) throw Error(ErrorCode::Io, "no results.csv in " + run_dir.string());
    std::istringstream in(read_text(results));
    std::string line;
    std::getline(in, line);
    if (line != kResultsHeader) throw Error(ErrorCode::Schema, "unexpected results header in " + results.string());

    struct Row {
        std::vector<std::string> cells;
        double sr, spl, ndtw, sdtw;
    };
    std::vector<Row> rows;
    std::map<std::pair<std::string, std::string>, Row> frozen;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != 13) throw Error(ErrorCode::Schema, "malformed results row: " + line);
        Row r{cells, std::stod(cells[4]), std::stod(cells[6]), std::stod(cells[10]), std::stod(cells[11])};
        if (cells[1] == "frozen") frozen.insert_or_assign({cells[0], cells[2]}, r);
        rows.push_back(std::move(r));
    }

    std::string csv = "env,style,split,episodes,SR,dSR,SPL,dSPL,nDTW,dnDTW,SDTW,dSDTW\n";
    std::string txt;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-10s %-8s %-18s %8s %8s %8s %8s %8s\n", "env", "style", "split", "episodes", "SR",
                  "dSR", "SPL", "dSPL");
    txt += buf;
    for (const auto& r : rows) {
        const auto it = frozen.find({r.cells[0], r.cells[2]});
        auto delta = [&](double v, double Row::*field) {
            return it == frozen.end() ? std::string("") : fmt("%+.2f", v - it->second.*field);
        };
        csv += r.cells[0] + "," + r.cells[2] + "," + r.cells[1] + "," + r.cells[3] + "," + r.cells[4] + "," +
               delta(r.sr, &Row::sr) + "," + r.cells[6] + "," + delta(r.spl, &Row::spl) + "," + r.cells[10] + "," +
               delta(r.ndtw, &Row::ndtw) + "," + r.cells[11] + "," + delta(r.sdtw, &Row::sdtw) + "\n";
        std::snprintf(buf, sizeof buf, "%-10s %-8s %-18s %8s %8s %8s %8s %8s\n", r.cells[0].c_str(),
                      r.cells[2].c_str(), r.cells[1].c_str(), r.cells[3].c_str(), r.cells[4].c_str(),
                      delta(r.sr, &Row::sr).c_str(), r.cells[6].c_str(), delta(r.spl, &Row::spl).c_str());
        txt += buf;
    }
    write_text(run_dir / "summary.csv", csv);
    write_text(run_dir / "summary.txt", txt);
}

}  // namespace fbnav
