#include "fbnav/membank.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fbnav {

MemoryBank::MemoryBank(const EnvGraph& env)
    : env_(&env),
      env_name_(env.name()),
      discovered_(env.node_count(), false),
      positions_(env.node_count()),
      adjacency_(env.node_count()) {}

void MemoryBank::discover(NodeIndex v) {
    if (discovered_[v]) return;
    discovered_[v] = true;
    ++discovered_total_;
    positions_[v] = env_->position(v);
}

void MemoryBank::observe(NodeIndex v) {
    if (env_ == nullptr) throw Error(ErrorCode::Contract, "observe on a bank with no environment");
    if (!env_->has_node(v)) throw Error(ErrorCode::UnknownId, "observe: node " + std::to_string(v) + " not in env");

    discover(v);
    if (!cache_.contains(v)) {
        ObsDescriptor obs;
        obs.bag.assign(env_->landmark_vocab().size(), 0);
        for (std::uint32_t lm : env_->landmark_ids(v)) ++obs.bag[lm];
        cache_.emplace(v, std::move(obs));
    }
    frontier_.erase(v);

    auto& seen = candidates_[v];
    for (NodeIndex u : env_->neighbors(v)) {
        discover(u);
        seen.insert(u);
        for (auto [a, b] : {std::pair{v, u}, std::pair{u, v}}) {
            auto& adj = adjacency_[a];
            const auto it = std::lower_bound(adj.begin(), adj.end(), b);
            if (it == adj.end() || *it != b) adj.insert(it, b);
        }
        if (!cache_.contains(u)) frontier_.insert(u);
    }
}

std::size_t MemoryBank::edge_count() const {
    std::size_t twice = 0;
    for (const auto& adj : adjacency_) twice += adj.size();
    return twice / 2;
}

std::set<NodeIndex> MemoryBank::recompute_frontier() const {
    std::set<NodeIndex> out;
    for (NodeIndex i = 0; i < discovered_.size(); ++i) {
        if (discovered_[i] && !cache_.contains(i)) out.insert(i);
    }
    return out;
}

std::vector<NodeIndex> MemoryBank::discovered_nodes() const {
    std::vector<NodeIndex> out;
    for (NodeIndex i = 0; i < discovered_.size(); ++i) {
        if (discovered_[i]) out.push_back(i);
    }
    return out;
}

std::vector<std::pair<NodeIndex, NodeIndex>> MemoryBank::edges() const {
    std::vector<std::pair<NodeIndex, NodeIndex>> out;
    for (NodeIndex a = 0; a < adjacency_.size(); ++a) {
        for (NodeIndex b : adjacency_[a]) {
            if (a < b) out.emplace_back(a, b);
        }
    }
    return out;
}

bool operator==(const MemoryBank& a, const MemoryBank& b) {
    if (a.env_name_ != b.env_name_ || a.discovered_ != b.discovered_) return false;
    for (NodeIndex i = 0; i < a.discovered_.size(); ++i) {
        if (a.discovered_[i] && !(a.positions_[i] == b.positions_[i])) return false;
    }
    return a.adjacency_ == b.adjacency_ && a.cache_ == b.cache_ && a.candidates_ == b.candidates_ &&
           a.frontier_ == b.frontier_;
}

// ---------------------------------------------------------------------------

std::string serialize_bank(const MemoryBank& m) {
    const EnvGraph& env = m.env();
    nlohmann::json doc;  // std::map-backed: keys come out sorted
    doc["version"] = kBankVersion;
    doc["env_name"] = m.env_name();
    auto nodes = nlohmann::json::array();
    for (NodeIndex i : m.discovered_nodes()) {
        const Vec3& p = m.position(i);
        nodes.push_back({{"id", env.id(i)}, {"pos", {p.x, p.y, p.z}}});
    }
    doc["nodes"] = std::move(nodes);
    auto edges = nlohmann::json::array();
    for (const auto& [a, b] : m.edges()) edges.push_back({env.id(a), env.id(b)});
    doc["edges"] = std::move(edges);
    auto cache = nlohmann::json::object();
    for (const auto& [i, obs] : m.cache()) cache[env.id(i)] = {{"bag", obs.bag}};
    doc["cache"] = std::move(cache);
    auto cands = nlohmann::json::object();
    for (const auto& [i, seen] : m.candidates()) {
        auto ids = nlohmann::json::array();
        for (NodeIndex u : seen) ids.push_back(env.id(u));
        cands[env.id(i)] = std::move(ids);
    }
    doc["candidates"] = std::move(cands);
    return doc.dump(1) + "\n";
}

void save_bank(const MemoryBank& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write memory bank " + path.string());
    out << serialize_bank(m);
}

MemoryBank parse_bank(std::string_view text, const EnvGraph& env) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Parse, std::string("memory bank: ") + e.what());
    }

    MemoryBank m(env);
    try {
        const int version = doc.at("version").get<int>();
        if (version != kBankVersion) {
            throw Error(ErrorCode::VersionMismatch, "memory bank version " + std::to_string(version) +
                                                        " (expected " + std::to_string(kBankVersion) + ")");
        }
        const auto name = doc.at("env_name").get<std::string>();
        if (name != env.name()) {
            throw Error(ErrorCode::EnvMismatch,
                        "memory bank belongs to environment '" + name + "', session is '" + env.name() + "'");
        }

        auto lookup = [&](const std::string& id) {
            const auto i = env.find(id);
            if (!i) throw Error(ErrorCode::Schema, "memory bank references unknown viewpoint '" + id + "'");
            return *i;
        };

        for (const auto& jn : doc.at("nodes")) {
            const NodeIndex i = lookup(jn.at("id").get<std::string>());
            const auto& pos = jn.at("pos");
            if (!pos.is_array() || pos.size() != 3) throw Error(ErrorCode::Schema, "memory bank: bad pos");
            const Vec3 p{pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()};
            if (!(p == env.position(i))) {
                throw Error(ErrorCode::EnvMismatch, "memory bank position of '" + env.id(i) + "' differs from env");
            }
            m.discover(i);
        }
        for (const auto& je : doc.at("edges")) {
            const NodeIndex a = lookup(je.at(0).get<std::string>());
            const NodeIndex b = lookup(je.at(1).get<std::string>());
            if (!m.has_node(a) || !m.has_node(b)) throw Error(ErrorCode::Schema, "memory bank edge endpoint not discovered");
            if (!env.has_edge(a, b)) {
                throw Error(ErrorCode::EnvMismatch,
                            "memory bank edge ['" + env.id(a) + "','" + env.id(b) + "'] not in env");
            }
            for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
                auto& adj = m.adjacency_[x];
                const auto it = std::lower_bound(adj.begin(), adj.end(), y);
                if (it == adj.end() || *it != y) adj.insert(it, y);
            }
        }
        for (const auto& [id, jc] : doc.at("cache").items()) {
            const NodeIndex i = lookup(id);
            if (!m.has_node(i)) throw Error(ErrorCode::Schema, "memory bank cache entry for undiscovered '" + id + "'");
            ObsDescriptor obs{jc.at("bag").get<std::vector<int>>()};
            const bool positive = std::any_of(obs.bag.begin(), obs.bag.end(), [](int c) { return c > 0; });
            const bool nonneg = std::all_of(obs.bag.begin(), obs.bag.end(), [](int c) { return c >= 0; });
            if (obs.bag.size() != env.landmark_vocab().size() || !positive || !nonneg) {
                throw Error(ErrorCode::Schema, "memory bank cache entry '" + id + "' has an invalid bag");
            }
            m.cache_.emplace(i, std::move(obs));
        }
        for (const auto& [id, jc] : doc.at("candidates").items()) {
            const NodeIndex i = lookup(id);
            auto& seen = m.candidates_[i];
            for (const auto& ju : jc) {
                const NodeIndex u = lookup(ju.get<std::string>());
                if (!m.has_node(u)) throw Error(ErrorCode::Schema, "memory bank candidate '" + env.id(u) + "' not discovered");
                seen.insert(u);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Schema, std::string("memory bank: ") + e.what());
    }
    m.frontier_ = m.recompute_frontier();
    return m;
}

MemoryBank load_bank(const std::filesystem::path& path, const EnvGraph& env) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open memory bank " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_bank(ss.str(), env);
}

double coverage(const MemoryBank& m, const EnvGraph& g) {
    if (g.node_count() == 0) return 0.0;
    return static_cast<double>(m.visited_count()) / static_cast<double>(g.node_count());
}

}  // namespace fbnav
