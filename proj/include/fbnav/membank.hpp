#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fbnav/envgraph.hpp"

namespace fbnav {

/// Cached observation of a visited node: landmark counts over the
/// environment's landmark vocabulary.
struct ObsDescriptor {
    std::vector<int> bag;

    friend bool operator==(const ObsDescriptor&, const ObsDescriptor&) = default;
};

/// The agent's persistent environment memory: discovered topology,
/// observation cache of visited nodes, and the per-node map of neighbors
/// observed from each visited node. Node indices are those of the bound
/// EnvGraph, which must outlive the bank.
///
/// Satisfies GraphLike over the discovered subgraph, so A* runs on it
/// directly.
class MemoryBank {
public:
    MemoryBank() = default;
    explicit MemoryBank(const EnvGraph& env);

    const EnvGraph& env() const { return *env_; }
    const std::string& env_name() const { return env_name_; }

    // GraphLike
    std::size_t node_count() const { return discovered_.size(); }
    bool has_node(NodeIndex i) const { return i < discovered_.size() && discovered_[i]; }
    const Vec3& position(NodeIndex i) const { return positions_.at(i); }
    std::span<const NodeIndex> neighbors(NodeIndex i) const { return adjacency_.at(i); }

    /// Visits v: caches its observation, discovers every ground-truth
    /// neighbor and records the connecting edges. Throws Error(UnknownId).
    void observe(NodeIndex v);
    void observe(std::string_view id) { observe(env_->index_of(id)); }

    bool visited(NodeIndex i) const { return cache_.contains(i); }
    std::size_t discovered_count() const { return discovered_total_; }
    std::size_t visited_count() const { return cache_.size(); }
    std::size_t edge_count() const;

    /// Discovered but not yet visited nodes, maintained incrementally.
    const std::set<NodeIndex>& frontier() const { return frontier_; }
    /// Same set, rebuilt from scratch.
    std::set<NodeIndex> recompute_frontier() const;

    const std::map<NodeIndex, ObsDescriptor>& cache() const { return cache_; }
    const std::map<NodeIndex, std::set<NodeIndex>>& candidates() const { return candidates_; }
    std::vector<NodeIndex> discovered_nodes() const;
    std::vector<std::pair<NodeIndex, NodeIndex>> edges() const;

    friend bool operator==(const MemoryBank& a, const MemoryBank& b);

private:
    void discover(NodeIndex v);

    const EnvGraph* env_ = nullptr;
    std::string env_name_;
    std::vector<bool> discovered_;
    std::size_t discovered_total_ = 0;
    std::vector<Vec3> positions_;
    std::vector<std::vector<NodeIndex>> adjacency_;
    std::map<NodeIndex, ObsDescriptor> cache_;
    std::map<NodeIndex, std::set<NodeIndex>> candidates_;
    std::set<NodeIndex> frontier_;

    friend MemoryBank parse_bank(std::string_view, const EnvGraph&);
};

inline constexpr int kBankVersion = 1;

/// Canonical JSON (sorted keys and ids), byte-deterministic.
std::string serialize_bank(const MemoryBank& m);
void save_bank(const MemoryBank& m, const std::filesystem::path& path);

/// Refuses files with another version, another env_name, or content that
/// is not a subgraph of `env`.
MemoryBank parse_bank(std::string_view text, const EnvGraph& env);
MemoryBank load_bank(const std::filesystem::path& path, const EnvGraph& env);

/// Fraction of viewpoints visited (cached).
double coverage(const MemoryBank& m, const EnvGraph& g);

}  // namespace fbnav
