#include "fbnav/envgraph.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "fbnav/rng.hpp"
#include "json.hpp"

namespace fbnav {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr double kMinSeparation = 0.5;  // meters between generated viewpoints
constexpr double kGridSpacing = 2.0;

std::string pad_id(std::size_t i, std::size_t width) {
    std::string digits = std::to_string(i);
    if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
    return "v" + digits;
}

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

EnvGraph::EnvGraph(std::string name, std::vector<Viewpoint> nodes, const std::vector<Edge>& edges)
    : name_(std::move(name)), nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw Error(ErrorCode::Schema, "environment has no nodes");

    std::sort(nodes_.begin(), nodes_.end(),
              [](const Viewpoint& a, const Viewpoint& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        auto& vp = nodes_[i];
        if (vp.id.empty()) throw Error(ErrorCode::Schema, "node with empty id");
        if (i > 0 && nodes_[i - 1].id == vp.id) {
            throw Error(ErrorCode::DuplicateId, "duplicate node id '" + vp.id + "'");
        }
        vp.landmarks = sorted_unique(std::move(vp.landmarks));
        if (vp.landmarks.empty()) {
            throw Error(ErrorCode::Schema, "node '" + vp.id + "' has no landmarks");
        }
        index_.emplace(vp.id, static_cast<NodeIndex>(i));
    }

    std::set<std::pair<NodeIndex, NodeIndex>> unique_edges;
    for (const auto& [a, b] : edges) {
        if (a == b) throw Error(ErrorCode::SelfLoop, "self-loop edge ['" + a + "','" + b + "']");
        const auto ia = find(a);
        const auto ib = find(b);
        if (!ia || !ib) {
            throw Error(ErrorCode::DanglingEdge,
                        "edge ['" + a + "','" + b + "'] references unknown node '" + (ia ? b : a) + "'");
        }
        if (distance(nodes_[*ia].pos, nodes_[*ib].pos) <= 0.0) {
            throw Error(ErrorCode::Schema, "edge ['" + a + "','" + b + "'] has zero length");
        }
        unique_edges.emplace(std::min(*ia, *ib), std::max(*ia, *ib));
    }
    edges_.assign(unique_edges.begin(), unique_edges.end());

    adjacency_.resize(nodes_.size());
    for (const auto& [a, b] : edges_) {
        adjacency_[a].push_back(b);
        adjacency_[b].push_back(a);
    }
    for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());

    // Connectivity check by BFS from the first node.
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<NodeIndex> stack{0};
    seen[0] = true;
    while (!stack.empty()) {
        const NodeIndex u = stack.back();
        stack.pop_back();
        for (NodeIndex v : adjacency_[u]) {
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!seen[i]) {
            throw Error(ErrorCode::Disconnected,
                        "graph is disconnected: node '" + nodes_[i].id + "' unreachable from '" + nodes_[0].id + "'");
        }
    }

    std::vector<std::string> all;
    for (const auto& vp : nodes_) all.insert(all.end(), vp.landmarks.begin(), vp.landmarks.end());
    vocab_ = sorted_unique(std::move(all));
    landmark_ids_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        for (const auto& lm : nodes_[i].landmarks) {
            const auto it = std::lower_bound(vocab_.begin(), vocab_.end(), lm);
            landmark_ids_[i].push_back(static_cast<std::uint32_t>(it - vocab_.begin()));
        }
    }
}

std::optional<NodeIndex> EnvGraph::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

NodeIndex EnvGraph::index_of(std::string_view id) const {
    if (auto i = find(id)) return *i;
    throw Error(ErrorCode::UnknownId, "unknown viewpoint id '" + std::string(id) + "'");
}

bool EnvGraph::has_edge(NodeIndex a, NodeIndex b) const {
    const auto adj = neighbors(a);
    return std::binary_search(adj.begin(), adj.end(), b);
}

// ---------------------------------------------------------------------------

EnvGraph parse_env(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Parse, std::string("environment file: ") + e.what());
    }
    try {
        if (!doc.is_object()) throw Error(ErrorCode::Schema, "environment file: top level must be an object");
        std::vector<Viewpoint> nodes;
        for (const auto& jn : doc.at("nodes")) {
            Viewpoint vp;
            vp.id = jn.at("id").get<std::string>();
            const auto& pos = jn.at("pos");
            if (!pos.is_array() || pos.size() != 3) {
                throw Error(ErrorCode::Schema, "node '" + vp.id + "': pos must be [x,y,z]");
            }
            vp.pos = {pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()};
            vp.landmarks = jn.at("landmarks").get<std::vector<std::string>>();
            nodes.push_back(std::move(vp));
        }
        std::vector<EnvGraph::Edge> edges;
        for (const auto& je : doc.at("edges")) {
            if (!je.is_array() || je.size() != 2) throw Error(ErrorCode::Schema, "edge must be a pair of ids");
            edges.emplace_back(je[0].get<std::string>(), je[1].get<std::string>());
        }
        return EnvGraph(doc.at("name").get<std::string>(), std::move(nodes), edges);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Schema, std::string("environment file: ") + e.what());
    }
}

EnvGraph load_env(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open environment file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_env(ss.str());
}

std::string serialize_env(const EnvGraph& g) {
    ordered_json doc;
    doc["name"] = g.name();
    ordered_json nodes = ordered_json::array();
    for (NodeIndex i = 0; i < g.node_count(); ++i) {
        const auto& vp = g.node(i);
        ordered_json jn;
        jn["id"] = vp.id;
        jn["pos"] = {vp.pos.x, vp.pos.y, vp.pos.z};
        jn["landmarks"] = vp.landmarks;
        nodes.push_back(std::move(jn));
    }
    doc["nodes"] = std::move(nodes);
    ordered_json edges = ordered_json::array();
    for (const auto& [a, b] : g.edges()) edges.push_back({g.id(a), g.id(b)});
    doc["edges"] = std::move(edges);
    return doc.dump(1) + "\n";
}

void save_env(const EnvGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write environment file " + path.string());
    out << serialize_env(g);
}

// ---------------------------------------------------------------------------

std::optional<GraphModel> parse_graph_model(std::string_view s) {
    if (s == "grid") return GraphModel::Grid;
    if (s == "random-geometric") return GraphModel::RandomGeometric;
    return std::nullopt;
}

std::string_view to_string(GraphModel m) {
    return m == GraphModel::Grid ? "grid" : "random-geometric";
}

std::vector<std::string> default_landmark_vocab() {
    return {"armchair", "bathtub", "bed",    "bookshelf", "cabinet", "desk",   "door",
            "fireplace", "fridge", "lamp",   "mirror",    "painting", "piano", "plant",
            "rug",       "sink",   "sofa",   "stairs",    "table",   "window"};
}

EnvGraph generate_env(const GeneratorParams& params) {
    if (params.n_nodes < 2) throw Error(ErrorCode::InvalidArgument, "generate_env: n_nodes must be >= 2");
    const auto vocab = sorted_unique(params.landmark_vocab);
    if (vocab.empty()) throw Error(ErrorCode::InvalidArgument, "generate_env: landmark vocabulary is empty");

    const std::size_t n = params.n_nodes;
    const std::size_t width = std::max<std::size_t>(2, std::to_string(n - 1).size());

    std::vector<Viewpoint> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i].id = pad_id(i, width);

    std::vector<EnvGraph::Edge> edges;
    auto connect = [&](std::size_t a, std::size_t b) { edges.emplace_back(nodes[a].id, nodes[b].id); };

    if (params.model == GraphModel::Grid) {
        const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t r = i / cols;
            const std::size_t c = i % cols;
            nodes[i].pos = {kGridSpacing * static_cast<double>(c), kGridSpacing * static_cast<double>(r), 0.0};
            if (c + 1 < cols && i + 1 < n) connect(i, i + 1);
            if (i + cols < n) connect(i, i + cols);
        }
    } else {
        // Box side chosen for roughly one viewpoint per (2 m)^2.
        const double side = kGridSpacing * std::sqrt(static_cast<double>(n));
        Rng pos_rng(derive_seed(params.seed, "positions"));
        for (std::size_t i = 0; i < n; ++i) {
            Vec3 p;
            for (int attempt = 0; attempt < 1000; ++attempt) {
                p = {pos_rng.uniform(0.0, side), pos_rng.uniform(0.0, side), 0.0};
                bool clear = true;
                for (std::size_t j = 0; j < i && clear; ++j) clear = distance(p, nodes[j].pos) >= kMinSeparation;
                if (clear) break;
            }
            nodes[i].pos = p;
        }

        std::set<std::pair<std::size_t, std::size_t>> added;
        auto add_edge = [&](std::size_t a, std::size_t b) {
            if (added.emplace(std::min(a, b), std::max(a, b)).second) connect(a, b);
        };

        // Random spanning tree: visit nodes in random order, attach each to
        // its nearest already-attached node.
        Rng tree_rng(derive_seed(params.seed, "tree"));
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        tree_rng.shuffle(order);
        for (std::size_t k = 1; k < n; ++k) {
            std::size_t nearest = order[0];
            double best = distance(nodes[order[k]].pos, nodes[nearest].pos);
            for (std::size_t j = 1; j < k; ++j) {
                const double d = distance(nodes[order[k]].pos, nodes[order[j]].pos);
                if (d < best || (d == best && order[j] < nearest)) {
                    best = d;
                    nearest = order[j];
                }
            }
            add_edge(order[k], nearest);
        }

        // Expected degree (n-1) * pi r^2 / side^2 = 4.
        const double radius = side * std::sqrt(4.0 / (M_PI * static_cast<double>(n - 1)));
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (distance(nodes[a].pos, nodes[b].pos) <= radius) add_edge(a, b);
            }
        }
    }

    Rng lm_rng(derive_seed(params.seed, "landmarks"));
    for (auto& vp : nodes) {
        const std::size_t k = std::min<std::size_t>(1 + lm_rng.below(3), vocab.size());
        std::vector<std::string> pool = vocab;
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t pick = j + lm_rng.below(pool.size() - j);
            std::swap(pool[j], pool[pick]);
            vp.landmarks.push_back(pool[j]);
        }
    }

    std::string name = params.name.empty() ? "env-" + std::to_string(params.seed) : params.name;
    return EnvGraph(std::move(name), std::move(nodes), edges);
}

// ---------------------------------------------------------------------------

std::vector<double> shortest_distances(const EnvGraph& g, NodeIndex src) {
    std::vector<double> dist(g.node_count(), std::numeric_limits<double>::infinity());
    using Entry = std::pair<double, NodeIndex>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    dist.at(src) = 0.0;
    open.emplace(0.0, src);
    while (!open.empty()) {
        const auto [d, u] = open.top();
        open.pop();
        if (d > dist[u]) continue;
        for (NodeIndex v : g.neighbors(u)) {
            const double cand = d + g.weight(u, v);
            if (cand < dist[v]) {
                dist[v] = cand;
                open.emplace(cand, v);
            }
        }
    }
    return dist;
}

double geodesic(const EnvGraph& g, std::string_view u, std::string_view v) {
    const NodeIndex iu = g.index_of(u);
    const NodeIndex iv = g.index_of(v);
    if (iu == iv) return 0.0;
    // Always search from the lower index so the result is exactly symmetric.
    return shortest_distances(g, std::min(iu, iv))[std::max(iu, iv)];
}

GeoTable::GeoTable(const EnvGraph& g) : n_(g.node_count()), dist_(n_ * n_) {
    for (NodeIndex u = 0; u < n_; ++u) {
        const auto row = shortest_distances(g, u);
        std::copy(row.begin(), row.end(), dist_.begin() + static_cast<std::ptrdiff_t>(u * n_));
    }
    // Searches from either end can differ in the last ulp; mirror the
    // lower-index row so the table agrees exactly with geodesic().
    for (std::size_t u = 0; u < n_; ++u) {
        for (std::size_t v = u + 1; v < n_; ++v) dist_[v * n_ + u] = dist_[u * n_ + v];
    }
}

NodePath shortest_path(const EnvGraph& g, NodeIndex src, NodeIndex dst) {
    auto path = astar_path(g, src, dst);
    if (!path) throw Error(ErrorCode::Contract, "no path between '" + g.id(src) + "' and '" + g.id(dst) + "'");
    return *path;
}

}  // namespace fbnav
