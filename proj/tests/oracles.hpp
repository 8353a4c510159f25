#pragma once

// Independent reference implementations used only by tests. Deliberately
// naive: no shared code with the library's search or DP routines.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "fbnav/envgraph.hpp"

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Single-source distances by Bellman-Ford relaxation over the edge list.
inline std::vector<double> bellman_ford(const fbnav::EnvGraph& g, fbnav::NodeIndex src) {
    std::vector<double> d(g.node_count(), kInf);
    d[src] = 0.0;
    for (std::size_t round = 0; round + 1 < g.node_count(); ++round) {
        bool changed = false;
        for (const auto& [a, b] : g.edges()) {
            const double w = fbnav::distance(g.position(a), g.position(b));
            if (d[a] + w < d[b]) d[b] = d[a] + w, changed = true;
            if (d[b] + w < d[a]) d[a] = d[b] + w, changed = true;
        }
        if (!changed) break;
    }
    return d;
}

/// O(V^2) array Dijkstra over any adjacency view.
template <class G>
double dijkstra(const G& g, fbnav::NodeIndex src, fbnav::NodeIndex dst) {
    const std::size_t n = g.node_count();
    std::vector<double> d(n, kInf);
    std::vector<bool> done(n, false);
    d[src] = 0.0;
    for (;;) {
        std::size_t u = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!done[i] && d[i] < kInf && (u == n || d[i] < d[u])) u = i;
        }
        if (u == n) break;
        done[u] = true;
        for (fbnav::NodeIndex v : g.neighbors(static_cast<fbnav::NodeIndex>(u))) {
            const double w = fbnav::distance(g.position(static_cast<fbnav::NodeIndex>(u)), g.position(v));
            d[v] = std::min(d[v], d[u] + w);
        }
    }
    return d[dst];
}

/// Minimum alignment cost over every monotone boundary-matched warping path,
/// enumerated recursively.
inline double brute_dtw(const std::vector<fbnav::NodeIndex>& q, const std::vector<fbnav::NodeIndex>& r,
                        const std::function<double(fbnav::NodeIndex, fbnav::NodeIndex)>& dist) {
    std::function<double(std::size_t, std::size_t)> walk = [&](std::size_t i, std::size_t j) -> double {
        const double here = dist(q[i], r[j]);
        if (i + 1 == q.size() && j + 1 == r.size()) return here;
        double best = kInf;
        if (i + 1 < q.size()) best = std::min(best, walk(i + 1, j));
        if (j + 1 < r.size()) best = std::min(best, walk(i, j + 1));
        if (i + 1 < q.size() && j + 1 < r.size()) best = std::min(best, walk(i + 1, j + 1));
        return here + best;
    };
    return walk(0, 0);
}

/// Central finite-difference gradient of f at x.
inline std::vector<double> fd_gradient(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x, double eps = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + eps;
        const double up = f(x);
        x[i] = keep - eps;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * eps);
    }
    return g;
}

/// max_i |a_i - b_i| / max(1, |b_i|).
inline double max_rel_error(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
    }
    return worst;
}

}  // namespace oracle
