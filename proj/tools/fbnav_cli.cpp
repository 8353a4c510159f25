#include <cstdio>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fbnav/error.hpp"
#include "fbnav/harness.hpp"

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string env;
    std::string style;
    std::string mode;
    std::string warm_start;
    std::string out;
    std::string policy;
};

void add_common(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "JSON run config or a manifest.json to replay");
    cmd->add_option("--seed", f.seed, "Master seed");
    cmd->add_option("--env", f.env, "Environment JSON file (default: generated)");
    cmd->add_option("--style", f.style, "Stage style(s), comma separated");
    cmd->add_option("--mode", f.mode, "Adaptation mode: continual, hybrid, entropy, none");
    cmd->add_option("--warm-start", f.warm_start, "Memory bank file to start deployment from");
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--policy", f.policy, "Policy file (default: pretrain in-process)");
}

fbnav::RunConfig resolve(const Flags& f) {
    fbnav::RunConfig c = f.config.empty() ? fbnav::RunConfig::defaults() : fbnav::load_run_config(f.config);
    if (f.seed) c.seed = *f.seed;
    if (!f.env.empty()) c.env_path = f.env;
    if (!f.mode.empty()) c.adapt.mode = fbnav::parse_adapt_mode(f.mode);
    if (!f.warm_start.empty()) c.warm_start = f.warm_start;
    if (!f.out.empty()) c.out_dir = f.out;
    if (!f.policy.empty()) c.policy_path = f.policy;
    if (!f.style.empty()) {
        const fbnav::StageCount tmpl = c.stages.empty() ? fbnav::StageCount{} : c.stages.front();
        c.stages.clear();
        std::istringstream in(f.style);
        std::string s;
        while (std::getline(in, s, ',')) {
            fbnav::StageCount st = tmpl;
            st.style = s;
            c.stages.push_back(st);
        }
    }
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feedback-driven navigation adaptation harness"};
    app.require_subcommand(1);
    Flags flags;
    std::string report_dir;

    auto* pretrain = app.add_subcommand("pretrain", "Train the base policy on the source style");
    auto* deploy = app.add_subcommand("deploy", "Run deployment episodes and collect feedback");
    auto* adapt = app.add_subcommand("adapt", "Deploy, collect feedback and update the policy");
    auto* ablate = app.add_subcommand("ablate", "Grid over instruction and feedback counts");
    auto* report = app.add_subcommand("report", "Summarize a run directory against the frozen baseline");
    for (auto* cmd : {pretrain, deploy, adapt, ablate}) add_common(cmd, flags);
    report->add_option("dir", report_dir, "Run directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::fprintf(stderr, "error: usage: %s\n", e.what());
        return 2;
    }

    try {
        if (report->parsed()) {
            fbnav::cmd_report(report_dir);
        } else {
            const auto cfg = resolve(flags);
            if (pretrain->parsed()) fbnav::cmd_pretrain(cfg);
            if (deploy->parsed()) fbnav::cmd_deploy(cfg);
            if (adapt->parsed()) fbnav::cmd_adapt(cfg);
            if (ablate->parsed()) fbnav::cmd_ablate(cfg);
        }
    } catch (const fbnav::Error& e) {
        std::fprintf(stderr, "error: %s: %s\n", std::string(fbnav::to_string(e.code())).c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", e.what());
        return 3;
    }
    return 0;
}
