#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fbnav/adapt.hpp"
#include "fbnav/envgraph.hpp"
#include "fbnav/policy.hpp"
#include "fbnav/session.hpp"
#include "fbnav/synthlang.hpp"
#include "json.hpp"

namespace fbnav {

struct StyleSpec {
    std::string id;
    double synonym_rate = 0.0;
};

struct StageCount {
    std::string style;
    std::size_t n_instructions = 100;
    std::size_t n_feedback = 100;
};

/// One run's full configuration. Serialized verbatim into every manifest so
/// a run can be replayed from its manifest alone.
struct RunConfig {
    std::uint64_t seed = 1;

    std::string env_path;  // empty: generate
    std::size_t env_nodes = 60;
    GraphModel env_model = GraphModel::RandomGeometric;
    std::string env_name = "desk60";

    std::vector<StyleSpec> styles;
    std::string source_style = "basic";

    std::size_t pretrain_instructions = 300;
    std::size_t pretrain_heldout = 100;
    PretrainConfig pretrain;

    std::vector<StageCount> stages;
    std::size_t n_test = 500;
    AdaptConfig adapt;

    std::vector<std::size_t> ablate_instructions{100, 300, 500};
    std::vector<std::size_t> ablate_feedback{100, 300, 500};

    std::size_t t_max = kDefaultTMax;
    double d_th = kDefaultSuccessThreshold;
    LengthRange instr_len{5, 7};
    LengthRange filter{5, 7};

    std::string policy_path;  // empty: pretrain in-process
    std::string warm_start;   // memory bank file, deploy only
    std::string out_dir = "runs/default";

    /// Defaults: basic plus five user styles at synonym rate 0.8, and
    /// three continual stages.
    static RunConfig defaults();
    /// Throws Error(InvalidArgument) on bad counts or unknown styles.
    void validate() const;
};

nlohmann::ordered_json to_json(const RunConfig& c);
/// Accepts a config object or a run manifest (uses its "config" member).
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// The environment, geodesics, feature space and styles of a run.
class World {
public:
    explicit World(const RunConfig& cfg);
    World(const World&) = delete;
    World& operator=(const World&) = delete;

    const EnvGraph& env() const { return env_; }
    const GeoTable& geo() const { return geo_; }
    const FeatureSpace& space() const { return space_; }
    const StyleBook& styles() const { return styles_; }
    const Scenario& scenario() const { return scenario_; }

    std::vector<Instruction> source_train() const;
    std::vector<Instruction> source_heldout() const;
    std::vector<Demo> source_corpus() const;
    StageSpec stage_spec(const StageCount& s, std::size_t index) const;

private:
    RunConfig cfg_;
    EnvGraph env_;
    GeoTable geo_;
    FeatureSpace space_;
    StyleBook styles_;
    Scenario scenario_;
};

/// Each command writes its artifacts and manifest.json under cfg.out_dir.
void cmd_pretrain(const RunConfig& cfg);
void cmd_deploy(const RunConfig& cfg);
void cmd_adapt(const RunConfig& cfg);
void cmd_ablate(const RunConfig& cfg);
void cmd_report(const std::filesystem::path& run_dir);

}  // namespace fbnav
