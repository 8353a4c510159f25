#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fbnav/envgraph.hpp"
#include "fbnav/feedback.hpp"

namespace fbnav {

inline constexpr double kDefaultSuccessThreshold = 3.0;  // meters

/// Per-episode navigation metrics. Rates are in [0,1]; distances in meters.
struct EpisodeMetrics {
    double sr = 0.0;
    double osr = 0.0;
    double spl = 0.0;
    double ne = 0.0;
    double oe = 0.0;
    double pl = 0.0;
    double ndtw = 0.0;
    double sdtw = 0.0;
    double cls = 0.0;
};

struct MetricsReport {
    std::vector<EpisodeMetrics> episodes;
    EpisodeMetrics mean;  // plain means over episodes, rates still in [0,1]
};

/// Boundary-matched dynamic time warping over geodesic node distances,
/// steps {down, right, diagonal}.
double dtw(const NodePath& query, const NodePath& reference, const GeoTable& geo);

EpisodeMetrics episode_metrics(const NodePath& trajectory, const NodePath& gt_path, NodeIndex goal,
                               const EnvGraph& g, const GeoTable& geo, double d_th = kDefaultSuccessThreshold);

MetricsReport aggregate(std::vector<EpisodeMetrics> rows);

/// Fraction of samples whose tau_plus equals the ground-truth path returned
/// by `gt_lookup(instr_id)`. 0 for an empty dataset.
double matched_path_rate(const AdaptDataset& samples,
                         const std::function<std::optional<NodePath>(const std::string&)>& gt_lookup);

/// One line of the results CSV.
struct ResultRow {
    std::string env;
    std::string split;
    std::string style;
    MetricsReport report;
};

inline constexpr const char* kResultsHeader = "env,split,style,episodes,SR,OSR,SPL,NE,OE,PL,nDTW,SDTW,CLS";

/// Rates x100 and distances in meters, both with 2 decimals.
std::string format_result_row(const ResultRow& row);
std::string format_results_csv(const std::vector<ResultRow>& rows);
void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

}  // namespace fbnav
