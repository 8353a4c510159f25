#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fbnav/envgraph.hpp"
#include "fbnav/membank.hpp"
#include "fbnav/synthlang.hpp"

namespace fbnav {

/// Index layout of the policy's binary features:
///   [0, |W|*|L|)   cross features (instruction word w, landmark l)
///   then revisit, move-bias, stop-bias, stop-all-consumed, stop-goal-match.
class FeatureSpace {
public:
    FeatureSpace() = default;
    FeatureSpace(std::vector<std::string> landmarks, std::vector<std::string> words);

    /// Words = landmarks plus every synonym variant of every landmark.
    static FeatureSpace with_synonyms(const std::vector<std::string>& landmarks);

    const std::vector<std::string>& landmarks() const { return landmarks_; }
    const std::vector<std::string>& words() const { return words_; }

    std::size_t cross_size() const { return words_.size() * landmarks_.size(); }
    std::size_t size() const { return cross_size() + 5; }

    std::uint32_t cross(std::uint32_t word, std::uint32_t landmark) const {
        return static_cast<std::uint32_t>(word * landmarks_.size() + landmark);
    }
    std::uint32_t revisit() const { return static_cast<std::uint32_t>(cross_size()); }
    std::uint32_t move_bias() const { return revisit() + 1; }
    std::uint32_t stop_bias() const { return revisit() + 2; }
    std::uint32_t stop_all_consumed() const { return revisit() + 3; }
    std::uint32_t stop_goal_match() const { return revisit() + 4; }
    bool is_cross(std::uint32_t f) const { return f < cross_size(); }

    std::optional<std::uint32_t> word_index(std::string_view w) const;
    std::optional<std::uint32_t> landmark_index(std::string_view l) const;

    friend bool operator==(const FeatureSpace&, const FeatureSpace&) = default;

private:
    std::vector<std::string> landmarks_;  // sorted
    std::vector<std::string> words_;      // sorted
};

/// Active binary features, ascending and unique.
using FeatureVec = std::vector<std::uint32_t>;

struct NavAction {
    enum class Kind { Move, Stop };
    Kind kind = Kind::Stop;
    NodeIndex target = 0;

    static NavAction move(NodeIndex t) { return {Kind::Move, t}; }
    static NavAction stop() { return {Kind::Stop, 0}; }
    bool is_stop() const { return kind == Kind::Stop; }

    friend bool operator==(const NavAction&, const NavAction&) = default;
};

/// An instruction resolved against one environment, user style and feature
/// space. The referenced env and space must outlive the task.
class Task {
public:
    Task(const Instruction& instr, const StyleMap& style, const EnvGraph& env, const FeatureSpace& space);

    const Instruction& instruction() const { return instr_; }
    const EnvGraph& env() const { return *env_; }
    const FeatureSpace& space() const { return *space_; }

    NodeIndex start() const { return start_; }
    NodeIndex goal() const { return goal_; }
    const NodePath& gt_path() const { return gt_path_; }
    std::size_t length() const { return instr_.tokens.size(); }

    /// True when token k names (through the style) a landmark of node v.
    bool token_matches(std::size_t k, NodeIndex v) const;
    /// Feature-space word of token k; nullopt for words outside the space.
    std::optional<std::uint32_t> word(std::size_t k) const { return words_.at(k); }
    /// Feature-space landmark ids of node v, ascending.
    FeatureVec node_landmarks(NodeIndex v) const;

private:
    Instruction instr_;
    const EnvGraph* env_;
    const FeatureSpace* space_;
    NodePath gt_path_;  // empty when unknown
    NodeIndex start_;
    NodeIndex goal_;
    std::vector<std::optional<std::uint32_t>> words_;
    std::vector<std::vector<bool>> token_denotes_;  // [token][env landmark id]
    std::vector<std::optional<std::uint32_t>> env_to_space_;
};

/// Decision-time view of an episode. `bank` is the memory being built by the
/// rollout; `pointer` is the next unconsumed token.
struct NavState {
    const Task* task = nullptr;
    const MemoryBank* bank = nullptr;
    NodeIndex current = 0;
    std::size_t pointer = 0;
    NodePath trajectory;
};

/// Observes the start node and applies the pointer rule there, since the
/// first token describes the start viewpoint.
NavState initial_state(const Task& task, MemoryBank& bank);

/// MOVE targets (ground-truth neighbors of the current node plus frontier
/// nodes reachable in the discovered graph) ascending by id, then STOP.
std::vector<NavAction> valid_actions(const NavState& s);
bool is_valid(const NavState& s, const NavAction& a);

/// Throws Error(Contract) when `a` is not valid in `s`.
FeatureVec features(const NavState& s, const NavAction& a);
std::vector<FeatureVec> action_features(const NavState& s, const std::vector<NavAction>& actions);

/// Executes MOVE(target): one hop to a neighbor, or the discovered-graph
/// shortest path to a frontier node. Every entered node is observed and
/// advances the pointer when it matches. Stops early after `max_hops`
/// hops; returns the number of hops taken.
std::size_t advance(NavState& s, NodeIndex target, MemoryBank& bank, std::size_t max_hops);

/// A state reduced to what the loss needs: one feature vector per valid
/// action and the index of the supervised action.
struct Decision {
    std::vector<FeatureVec> actions;
    std::size_t label = 0;
};

/// Throws Error(Contract) naming the state and action when `expert` is not
/// valid in `s`.
Decision make_decision(const NavState& s, const NavAction& expert);

std::vector<double> action_logits(std::span<const double> theta, const std::vector<FeatureVec>& actions);
/// Softmax of the logits with max-subtraction.
std::vector<double> action_dist(std::span<const double> theta, const std::vector<FeatureVec>& actions);
std::vector<double> action_dist(std::span<const double> theta, const NavState& s);

double entropy(std::span<const double> theta, const std::vector<FeatureVec>& actions);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Mean negative log-likelihood of the labels and its gradient.
LossGrad nll_grad(std::span<const double> theta, std::span<const Decision> batch);

/// Mean action-distribution entropy over `states` and its gradient.
LossGrad entropy_grad(std::span<const double> theta, std::span<const std::vector<FeatureVec>> states);

struct PolicyParams {
    FeatureSpace space;
    std::vector<double> theta;
    double alpha = 1e-2;

    static PolicyParams zeros(FeatureSpace space, double alpha);
};

inline constexpr int kPolicyVersion = 1;

std::string serialize_policy(const PolicyParams& p);
PolicyParams parse_policy(std::string_view text);
void save_policy(const PolicyParams& p, const std::filesystem::path& path);
PolicyParams load_policy(const std::filesystem::path& path);

}  // namespace fbnav
