#include "fbnav/policy.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace fbnav {

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

std::optional<std::uint32_t> sorted_index(const std::vector<std::string>& v, std::string_view key) {
    const auto it = std::lower_bound(v.begin(), v.end(), key);
    if (it == v.end() || *it != key) return std::nullopt;
    return static_cast<std::uint32_t>(it - v.begin());
}

std::string describe(const NavState& s, const NavAction& a) {
    const EnvGraph& env = s.task->env();
    std::string what = a.is_stop() ? "STOP" : "MOVE(" + (env.has_node(a.target) ? env.id(a.target) : std::to_string(a.target)) + ")";
    return what + " at '" + env.id(s.current) + "' of instruction '" + s.task->instruction().id + "'";
}

// Nodes reachable from `from` in the discovered graph.
std::vector<bool> reachable(const MemoryBank& bank, NodeIndex from) {
    std::vector<bool> seen(bank.node_count(), false);
    std::vector<NodeIndex> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
        const NodeIndex u = stack.back();
        stack.pop_back();
        for (NodeIndex v : bank.neighbors(u)) {
            if (!seen[v]) {
                seen[v] = true;
                stack.push_back(v);
            }
        }
    }
    return seen;
}

double dot(std::span<const double> theta, const FeatureVec& f) {
    double z = 0.0;
    for (std::uint32_t i : f) z += theta[i];
    return z;
}

// log-softmax of z, computed around the max logit.
std::vector<double> log_softmax(const std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double lse = zmax + std::log(sum);
    std::vector<double> out(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) out[k] = z[k] - lse;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------

FeatureSpace::FeatureSpace(std::vector<std::string> landmarks, std::vector<std::string> words)
    : landmarks_(sorted_unique(std::move(landmarks))), words_(sorted_unique(std::move(words))) {
    if (landmarks_.empty()) throw Error(ErrorCode::InvalidArgument, "feature space needs landmarks");
}

FeatureSpace FeatureSpace::with_synonyms(const std::vector<std::string>& landmarks) {
    std::vector<std::string> words = landmarks;
    for (const auto& lm : landmarks) {
        for (std::size_t k = 0; k < kSynonymVariants; ++k) words.push_back(synonym_token(lm, k));
    }
    return FeatureSpace(landmarks, std::move(words));
}

std::optional<std::uint32_t> FeatureSpace::word_index(std::string_view w) const { return sorted_index(words_, w); }

std::optional<std::uint32_t> FeatureSpace::landmark_index(std::string_view l) const {
    return sorted_index(landmarks_, l);
}

// ---------------------------------------------------------------------------

Task::Task(const Instruction& instr, const StyleMap& style, const EnvGraph& env, const FeatureSpace& space)
    : instr_(instr), env_(&env), space_(&space) {
    if (instr_.tokens.empty()) throw Error(ErrorCode::Contract, "instruction '" + instr_.id + "' has no tokens");
    // gt_path may be absent (instructions rebuilt from feedback data); start
    // and goal are then taken from the instruction fields.
    start_ = env.index_of(instr_.start);
    goal_ = env.index_of(instr_.goal);
    for (const auto& id : instr_.gt_path) gt_path_.push_back(env.index_of(id));
    if (!gt_path_.empty()) {
        if (gt_path_.front() != start_ || gt_path_.back() != goal_) {
            throw Error(ErrorCode::Contract, "instruction '" + instr_.id + "': gt_path must run from start to goal");
        }
        for (std::size_t k = 1; k < gt_path_.size(); ++k) {
            if (!env.has_edge(gt_path_[k - 1], gt_path_[k])) {
                throw Error(ErrorCode::Contract, "instruction '" + instr_.id + "': gt_path uses a missing edge");
            }
        }
    }

    const auto& vocab = env.landmark_vocab();
    for (const auto& tok : instr_.tokens) {
        words_.push_back(space.word_index(tok));
        std::vector<bool> denotes(vocab.size(), false);
        for (std::size_t l = 0; l < vocab.size(); ++l) {
            const auto it = style.to_token.find(vocab[l]);
            denotes[l] = it != style.to_token.end() && it->second == tok;
        }
        token_denotes_.push_back(std::move(denotes));
    }
    for (const auto& lm : vocab) env_to_space_.push_back(space.landmark_index(lm));
}

bool Task::token_matches(std::size_t k, NodeIndex v) const {
    const auto& denotes = token_denotes_.at(k);
    for (std::uint32_t l : env_->landmark_ids(v)) {
        if (denotes[l]) return true;
    }
    return false;
}

FeatureVec Task::node_landmarks(NodeIndex v) const {
    FeatureVec out;
    for (std::uint32_t l : env_->landmark_ids(v)) {
        if (const auto s = env_to_space_[l]) out.push_back(*s);
    }
    return out;
}

// ---------------------------------------------------------------------------

NavState initial_state(const Task& task, MemoryBank& bank) {
    NavState s;
    s.task = &task;
    s.bank = &bank;
    s.current = task.start();
    s.trajectory = {task.start()};
    bank.observe(task.start());
    if (task.token_matches(0, task.start())) s.pointer = 1;
    return s;
}

std::vector<NavAction> valid_actions(const NavState& s) {
    const EnvGraph& env = s.task->env();
    std::vector<NodeIndex> targets(env.neighbors(s.current).begin(), env.neighbors(s.current).end());
    if (!s.bank->frontier().empty()) {
        const auto reach = reachable(*s.bank, s.current);
        for (NodeIndex f : s.bank->frontier()) {
            if (reach[f]) targets.push_back(f);
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    }
    std::vector<NavAction> out;
    out.reserve(targets.size() + 1);
    for (NodeIndex t : targets) out.push_back(NavAction::move(t));
    out.push_back(NavAction::stop());
    return out;
}

bool is_valid(const NavState& s, const NavAction& a) {
    if (a.is_stop()) return true;
    const EnvGraph& env = s.task->env();
    if (!env.has_node(a.target)) return false;
    if (env.has_edge(s.current, a.target)) return true;
    if (!s.bank->frontier().contains(a.target)) return false;
    return reachable(*s.bank, s.current)[a.target];
}

namespace {

FeatureVec features_unchecked(const NavState& s, const NavAction& a) {
    const Task& task = *s.task;
    const FeatureSpace& space = task.space();
    FeatureVec f;
    if (a.is_stop()) {
        f.push_back(space.stop_bias());
        if (s.pointer == task.length()) f.push_back(space.stop_all_consumed());
        if (task.token_matches(task.length() - 1, s.current)) f.push_back(space.stop_goal_match());
        return f;
    }
    if (s.pointer < task.length()) {
        if (const auto w = task.word(s.pointer)) {
            for (std::uint32_t l : task.node_landmarks(a.target)) f.push_back(space.cross(*w, l));
        }
    }
    if (std::find(s.trajectory.begin(), s.trajectory.end(), a.target) != s.trajectory.end()) {
        f.push_back(space.revisit());
    }
    f.push_back(space.move_bias());
    return f;
}

}  // namespace

FeatureVec features(const NavState& s, const NavAction& a) {
    if (!is_valid(s, a)) throw Error(ErrorCode::Contract, "invalid action " + describe(s, a));
    return features_unchecked(s, a);
}

std::vector<FeatureVec> action_features(const NavState& s, const std::vector<NavAction>& actions) {
    std::vector<FeatureVec> out;
    out.reserve(actions.size());
    for (const auto& a : actions) out.push_back(features_unchecked(s, a));
    return out;
}

std::size_t advance(NavState& s, NodeIndex target, MemoryBank& bank, std::size_t max_hops) {
    const EnvGraph& env = s.task->env();
    NodePath path;
    if (env.has_edge(s.current, target)) {
        path = {s.current, target};
    } else {
        auto found = astar_path(bank, s.current, target);
        if (!found) {
            throw Error(ErrorCode::Contract,
                        "frontier node '" + env.id(target) + "' unreachable from '" + env.id(s.current) + "'");
        }
        path = std::move(*found);
    }

    std::size_t hops = 0;
    for (std::size_t k = 1; k < path.size() && hops < max_hops; ++k, ++hops) {
        const NodeIndex v = path[k];
        s.current = v;
        s.trajectory.push_back(v);
        bank.observe(v);
        if (s.pointer < s.task->length() && s.task->token_matches(s.pointer, v)) ++s.pointer;
    }
    return hops;
}

Decision make_decision(const NavState& s, const NavAction& expert) {
    const auto actions = valid_actions(s);
    const auto it = std::find(actions.begin(), actions.end(), expert);
    if (it == actions.end()) throw Error(ErrorCode::Contract, "expert action not valid: " + describe(s, expert));
    return Decision{action_features(s, actions), static_cast<std::size_t>(it - actions.begin())};
}

// ---------------------------------------------------------------------------

std::vector<double> action_logits(std::span<const double> theta, const std::vector<FeatureVec>& actions) {
    std::vector<double> z;
    z.reserve(actions.size());
    for (const auto& f : actions) z.push_back(dot(theta, f));
    return z;
}

std::vector<double> action_dist(std::span<const double> theta, const std::vector<FeatureVec>& actions) {
    if (actions.empty()) throw Error(ErrorCode::Contract, "action_dist: no actions");
    auto p = log_softmax(action_logits(theta, actions));
    for (double& v : p) v = std::exp(v);
    return p;
}

std::vector<double> action_dist(std::span<const double> theta, const NavState& s) {
    return action_dist(theta, action_features(s, valid_actions(s)));
}

double entropy(std::span<const double> theta, const std::vector<FeatureVec>& actions) {
    const auto logp = log_softmax(action_logits(theta, actions));
    double h = 0.0;
    for (double lp : logp) h -= std::exp(lp) * lp;
    return std::max(h, 0.0);
}

LossGrad nll_grad(std::span<const double> theta, std::span<const Decision> batch) {
    LossGrad out;
    out.grad.assign(theta.size(), 0.0);
    if (batch.empty()) return out;
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (const auto& d : batch) {
        if (d.label >= d.actions.size()) throw Error(ErrorCode::Contract, "nll_grad: label outside action set");
        const auto logp = log_softmax(action_logits(theta, d.actions));
        out.loss -= logp[d.label] * inv_n;
        for (std::size_t a = 0; a < d.actions.size(); ++a) {
            const double coef = (std::exp(logp[a]) - (a == d.label ? 1.0 : 0.0)) * inv_n;
            for (std::uint32_t i : d.actions[a]) out.grad[i] += coef;
        }
    }
    return out;
}

LossGrad entropy_grad(std::span<const double> theta, std::span<const std::vector<FeatureVec>> states) {
    LossGrad out;
    out.grad.assign(theta.size(), 0.0);
    if (states.empty()) return out;
    const double inv_n = 1.0 / static_cast<double>(states.size());
    for (const auto& actions : states) {
        const auto logp = log_softmax(action_logits(theta, actions));
        double h = 0.0;
        for (double lp : logp) h -= std::exp(lp) * lp;
        out.loss += h * inv_n;
        // dH/dz_a = -p_a (log p_a + H)
        for (std::size_t a = 0; a < actions.size(); ++a) {
            const double coef = -std::exp(logp[a]) * (logp[a] + h) * inv_n;
            for (std::uint32_t i : actions[a]) out.grad[i] += coef;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

PolicyParams PolicyParams::zeros(FeatureSpace space, double alpha) {
    PolicyParams p;
    p.theta.assign(space.size(), 0.0);
    p.space = std::move(space);
    p.alpha = alpha;
    return p;
}

std::string serialize_policy(const PolicyParams& p) {
    nlohmann::ordered_json doc;
    doc["version"] = kPolicyVersion;
    doc["feature_space"] = {{"landmarks", p.space.landmarks()}, {"words", p.space.words()}};
    doc["theta"] = p.theta;
    doc["alpha"] = p.alpha;
    return doc.dump() + "\n";
}

PolicyParams parse_policy(std::string_view text) {
    try {
        const auto doc = nlohmann::json::parse(text);
        const int version = doc.at("version").get<int>();
        if (version != kPolicyVersion) {
            throw Error(ErrorCode::VersionMismatch, "policy version " + std::to_string(version));
        }
        PolicyParams p;
        p.space = FeatureSpace(doc.at("feature_space").at("landmarks").get<std::vector<std::string>>(),
                               doc.at("feature_space").at("words").get<std::vector<std::string>>());
        p.theta = doc.at("theta").get<std::vector<double>>();
        p.alpha = doc.at("alpha").get<double>();
        if (p.theta.size() != p.space.size()) {
            throw Error(ErrorCode::Schema, "policy theta has " + std::to_string(p.theta.size()) +
                                               " entries, feature space needs " + std::to_string(p.space.size()));
        }
        for (double v : p.theta) {
            if (!std::isfinite(v)) throw Error(ErrorCode::Schema, "policy theta has a non-finite entry");
        }
        return p;
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::Parse, std::string("policy: ") + e.what());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Schema, std::string("policy: ") + e.what());
    }
}

void save_policy(const PolicyParams& p, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write policy " + path.string());
    out << serialize_policy(p);
}

PolicyParams load_policy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open policy " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_policy(ss.str());
}

}  // namespace fbnav
