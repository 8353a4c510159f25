#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fbnav/error.hpp"

namespace fbnav {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double distance(const Vec3& a, const Vec3& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

/// Position of a node inside its graph. Node indices follow lexicographic id
/// order, so comparing indices is comparing ids.
using NodeIndex = std::uint32_t;
using NodePath = std::vector<NodeIndex>;

struct Viewpoint {
    std::string id;
    Vec3 pos;
    std::vector<std::string> landmarks;  // sorted, unique, non-empty
};

/// Ground-truth viewpoint graph. Immutable once constructed.
class EnvGraph {
public:
    using Edge = std::pair<std::string, std::string>;

    EnvGraph() = default;

    /// Validates and canonicalizes: nodes sorted by id, edges stored once
    /// as (lower, higher) index pairs, adjacency lists sorted. Throws Error
    /// on duplicate ids, self-loops, dangling edges, zero-length edges or a
    /// disconnected graph.
    EnvGraph(std::string name, std::vector<Viewpoint> nodes, const std::vector<Edge>& edges);

    const std::string& name() const { return name_; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    bool has_node(NodeIndex i) const { return i < nodes_.size(); }

    const Viewpoint& node(NodeIndex i) const { return nodes_.at(i); }
    const std::string& id(NodeIndex i) const { return nodes_.at(i).id; }
    const Vec3& position(NodeIndex i) const { return nodes_.at(i).pos; }
    std::span<const NodeIndex> neighbors(NodeIndex i) const { return adjacency_.at(i); }

    std::optional<NodeIndex> find(std::string_view id) const;
    /// Throws Error(UnknownId) when absent.
    NodeIndex index_of(std::string_view id) const;

    const std::vector<std::pair<NodeIndex, NodeIndex>>& edges() const { return edges_; }
    bool has_edge(NodeIndex a, NodeIndex b) const;
    double weight(NodeIndex a, NodeIndex b) const { return distance(position(a), position(b)); }

    /// Sorted union of all node landmarks.
    const std::vector<std::string>& landmark_vocab() const { return vocab_; }
    /// Landmarks of node i as indices into landmark_vocab(), ascending.
    std::span<const std::uint32_t> landmark_ids(NodeIndex i) const { return landmark_ids_.at(i); }

private:
    std::string name_;
    std::vector<Viewpoint> nodes_;
    std::vector<std::pair<NodeIndex, NodeIndex>> edges_;
    std::vector<std::vector<NodeIndex>> adjacency_;
    std::unordered_map<std::string, NodeIndex> index_;
    std::vector<std::string> vocab_;
    std::vector<std::vector<std::uint32_t>> landmark_ids_;
};

// Environment file I/O. Writers emit the canonical ordering; readers accept
// any ordering.
EnvGraph load_env(const std::filesystem::path& path);
EnvGraph parse_env(std::string_view text);
std::string serialize_env(const EnvGraph& g);
void save_env(const EnvGraph& g, const std::filesystem::path& path);

enum class GraphModel { Grid, RandomGeometric };

std::optional<GraphModel> parse_graph_model(std::string_view s);
std::string_view to_string(GraphModel m);

std::vector<std::string> default_landmark_vocab();

struct GeneratorParams {
    std::uint64_t seed = 1;
    std::size_t n_nodes = 60;
    GraphModel model = GraphModel::RandomGeometric;
    std::vector<std::string> landmark_vocab = default_landmark_vocab();
    std::string name;  // empty: "env-<seed>"
};

/// Grid: ceil(sqrt(n)) columns, 2 m spacing, row-major fill.
/// Random-geometric: random spanning tree first, then radius edges sized
/// for a mean degree of about 4.
EnvGraph generate_env(const GeneratorParams& params);

/// Dijkstra distances from src to every node (infinity when unreachable).
std::vector<double> shortest_distances(const EnvGraph& g, NodeIndex src);

/// Length of the shortest weighted path; 0 iff u == v.
double geodesic(const EnvGraph& g, std::string_view u, std::string_view v);

/// All-pairs geodesic distances.
class GeoTable {
public:
    explicit GeoTable(const EnvGraph& g);

    double operator()(NodeIndex u, NodeIndex v) const { return dist_[u * n_ + v]; }
    std::size_t size() const { return n_; }

private:
    std::size_t n_ = 0;
    std::vector<double> dist_;
};

// ---------------------------------------------------------------------------
// A* search over anything exposing positions and adjacency: the ground-truth
// EnvGraph or an agent's discovered topology.

template <class G>
concept GraphLike = requires(const G& g, NodeIndex i) {
    { g.node_count() } -> std::convertible_to<std::size_t>;
    { g.has_node(i) } -> std::convertible_to<bool>;
    { g.position(i) } -> std::convertible_to<const Vec3&>;
    { g.neighbors(i) } -> std::convertible_to<std::span<const NodeIndex>>;
};

template <GraphLike G>
double path_weight(const G& g, const NodePath& path) {
    double w = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        w += distance(g.position(path[k - 1]), g.position(path[k]));
    }
    return w;
}

/// Minimum-weight path src -> dst (both inclusive), or nullopt when dst is
/// absent or unreachable. Heuristic is the straight-line distance to dst.
/// Ties at equal f-score expand the lexicographically smaller node first.
/// Throws Error(UnknownId) if src is not in g.
template <GraphLike G>
std::optional<NodePath> astar_path(const G& g, NodeIndex src, NodeIndex dst) {
    if (!g.has_node(src)) {
        throw Error(ErrorCode::UnknownId, "astar_path: source node " + std::to_string(src) + " not in graph");
    }
    if (dst >= g.node_count() || !g.has_node(dst)) return std::nullopt;
    if (src == dst) return NodePath{src};

    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr NodeIndex kNone = std::numeric_limits<NodeIndex>::max();
    const std::size_t n = g.node_count();
    const Vec3& goal = g.position(dst);

    std::vector<double> best(n, kInf);
    std::vector<double> h(n, -1.0);
    std::vector<NodeIndex> parent(n, kNone);
    auto heuristic = [&](NodeIndex v) {
        if (h[v] < 0.0) h[v] = distance(g.position(v), goal);
        return h[v];
    };

    using Entry = std::pair<double, NodeIndex>;  // (f, node); pairs order by f then id
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    best[src] = 0.0;
    open.emplace(heuristic(src), src);

    while (!open.empty()) {
        const auto [f, u] = open.top();
        open.pop();
        if (f > best[u] + heuristic(u)) continue;  // stale entry
        if (u == dst) break;
        for (NodeIndex v : g.neighbors(u)) {
            const double cand = best[u] + distance(g.position(u), g.position(v));
            if (cand < best[v]) {
                best[v] = cand;
                parent[v] = u;
                open.emplace(cand + heuristic(v), v);
            }
        }
    }
    if (best[dst] == kInf) return std::nullopt;

    NodePath path;
    for (NodeIndex v = dst; v != kNone; v = parent[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

/// Ground-truth shortest path between two nodes of a connected EnvGraph.
NodePath shortest_path(const EnvGraph& g, NodeIndex src, NodeIndex dst);

}  // namespace fbnav
