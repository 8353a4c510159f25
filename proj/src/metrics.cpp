#include "fbnav/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace fbnav {

double dtw(const NodePath& query, const NodePath& reference, const GeoTable& geo) {
    const std::size_t n = query.size();
    const std::size_t m = reference.size();
    if (n == 0 || m == 0) throw Error(ErrorCode::InvalidArgument, "dtw: empty path");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // cost[i][j] over a (n+1) x (m+1) grid with an infinite border.
    std::vector<double> cost((n + 1) * (m + 1), kInf);
    auto at = [&](std::size_t i, std::size_t j) -> double& { return cost[i * (m + 1) + j]; };
    at(0, 0) = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const double best = std::min({at(i - 1, j), at(i, j - 1), at(i - 1, j - 1)});
            at(i, j) = geo(query[i - 1], reference[j - 1]) + best;
        }
    }
    return at(n, m);
}

EpisodeMetrics episode_metrics(const NodePath& trajectory, const NodePath& gt_path, NodeIndex goal,
                               const EnvGraph& g, const GeoTable& geo, double d_th) {
    if (trajectory.empty()) throw Error(ErrorCode::InvalidArgument, "episode_metrics: empty trajectory");
    if (gt_path.empty()) throw Error(ErrorCode::InvalidArgument, "episode_metrics: empty reference path");
    if (!(d_th > 0.0)) throw Error(ErrorCode::InvalidArgument, "episode_metrics: threshold must be positive");

    EpisodeMetrics r;
    r.ne = geo(trajectory.back(), goal);
    r.sr = r.ne <= d_th ? 1.0 : 0.0;
    r.oe = std::numeric_limits<double>::infinity();
    for (NodeIndex v : trajectory) r.oe = std::min(r.oe, geo(v, goal));
    r.osr = r.oe <= d_th ? 1.0 : 0.0;
    r.pl = path_weight(g, trajectory);

    const double shortest = geo(trajectory.front(), goal);
    // A geodesic walked edge by edge may sum in another order than the
    // table did; treat a PL within rounding of l as optimal.
    const bool optimal = std::abs(r.pl - shortest) <= 1e-9 * std::max(1.0, shortest);
    r.spl = shortest == 0.0 || optimal ? r.sr : r.sr * shortest / std::max(shortest, r.pl);

    const double ref_len = static_cast<double>(gt_path.size());
    r.ndtw = std::exp(-dtw(trajectory, gt_path, geo) / (ref_len * d_th));
    r.sdtw = r.sr * r.ndtw;

    double pc = 0.0;
    for (NodeIndex ref : gt_path) {
        double nearest = std::numeric_limits<double>::infinity();
        for (NodeIndex v : trajectory) nearest = std::min(nearest, geo(ref, v));
        pc += std::exp(-nearest / d_th);
    }
    pc /= ref_len;
    const double epl = pc * path_weight(g, gt_path);
    if (epl == 0.0 && r.pl == 0.0) {
        r.cls = pc;
    } else {
        const double ls = epl / (epl + std::abs(epl - r.pl));
        r.cls = pc * ls;
    }
    return r;
}

MetricsReport aggregate(std::vector<EpisodeMetrics> rows) {
    MetricsReport rep;
    rep.episodes = std::move(rows);
    if (rep.episodes.empty()) return rep;
    EpisodeMetrics& m = rep.mean;
    for (const auto& e : rep.episodes) {
        m.sr += e.sr;
        m.osr += e.osr;
        m.spl += e.spl;
        m.ne += e.ne;
        m.oe += e.oe;
        m.pl += e.pl;
        m.ndtw += e.ndtw;
        m.sdtw += e.sdtw;
        m.cls += e.cls;
    }
    const double n = static_cast<double>(rep.episodes.size());
    for (double* f : {&m.sr, &m.osr, &m.spl, &m.ne, &m.oe, &m.pl, &m.ndtw, &m.sdtw, &m.cls}) *f /= n;
    return rep;
}

double matched_path_rate(const AdaptDataset& samples,
                         const std::function<std::optional<NodePath>(const std::string&)>& gt_lookup) {
    if (samples.empty()) return 0.0;
    std::size_t matched = 0;
    for (const auto& s : samples.samples()) {
        const auto gt = gt_lookup(s.instruction.id);
        if (gt && *gt == s.tau_plus) ++matched;
    }
    return static_cast<double>(matched) / static_cast<double>(samples.size());
}

std::string format_result_row(const ResultRow& row) {
    const auto& m = row.report.mean;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%zu,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f", row.env.c_str(),
                  row.split.c_str(), row.style.c_str(), row.report.episodes.size(), 100.0 * m.sr, 100.0 * m.osr,
                  100.0 * m.spl, m.ne, m.oe, m.pl, 100.0 * m.ndtw, 100.0 * m.sdtw, 100.0 * m.cls);
    return buf;
}

std::string format_results_csv(const std::vector<ResultRow>& rows) {
    std::string out = std::string(kResultsHeader) + "\n";
    for (const auto& r : rows) out += format_result_row(r) + "\n";
    return out;
}

void write_results_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << format_results_csv(rows);
}

}  // namespace fbnav
