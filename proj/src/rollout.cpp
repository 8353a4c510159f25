#include "fbnav/rollout.hpp"

#include <fstream>

#include "fbnav/rng.hpp"
#include "json.hpp"

namespace fbnav {

namespace {

std::size_t pick(const std::vector<double>& probs, SelectMode mode, Rng* rng) {
    if (mode == SelectMode::Greedy) {
        return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    }
    const double u = rng->uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) return k;
    }
    return probs.size() - 1;
}

}  // namespace

Episode run_scripted(const Task& task, MemoryBank& bank, std::size_t t_max, const ActionChooser& choose,
                     const FeedbackTrigger& trigger) {
    if (t_max == 0) throw Error(ErrorCode::InvalidArgument, "T_max must be positive");
    if (!task.env().has_node(task.start())) throw Error(ErrorCode::UnknownId, "episode start not in graph");

    Episode ep;
    ep.instr_id = task.instruction().id;
    NavState s = initial_state(task, bank);
    bool stopped = false;
    while (ep.actions.size() < t_max) {
        const auto actions = valid_actions(s);
        const NavAction a = choose(s, actions);
        if (a.is_stop()) {
            ep.actions.push_back(a);
            stopped = true;
            break;
        }
        if (!is_valid(s, a)) throw Error(ErrorCode::Contract, "chooser returned an invalid action");
        const std::size_t before = s.trajectory.size();
        advance(s, a.target, bank, t_max - ep.actions.size());
        for (std::size_t k = before; k < s.trajectory.size(); ++k) {
            ep.actions.push_back(NavAction::move(s.trajectory[k]));
        }
    }
    ep.trajectory = s.trajectory;
    ep.terminal = s.current;
    ep.T = ep.actions.size();
    ep.truncated = !stopped;
    if (trigger) trigger(ep.T, s);
    return ep;
}

Episode run_episode(std::span<const double> theta, const Task& task, MemoryBank& bank,
                    const RolloutOptions& opts, const FeedbackTrigger& trigger) {
    Rng rng(derive_seed(opts.seed, task.instruction().id));
    auto choose = [&](const NavState& s, const std::vector<NavAction>& actions) {
        const auto probs = action_dist(theta, action_features(s, actions));
        return actions[pick(probs, opts.mode, &rng)];
    };
    return run_scripted(task, bank, opts.t_max, choose, trigger);
}

NavAction expert_action(const EnvGraph& g, const GeoTable& geo, NodeIndex current, NodeIndex target) {
    if (current == target) return NavAction::stop();
    NodeIndex best = g.neighbors(current).front();
    double best_cost = std::numeric_limits<double>::infinity();
    for (NodeIndex n : g.neighbors(current)) {
        const double cost = g.weight(current, n) + geo(n, target);
        if (cost < best_cost) {
            best_cost = cost;
            best = n;
        }
    }
    return NavAction::move(best);
}

DaggerRollout dagger_rollout(std::span<const double> theta, const Task& task, MemoryBank& bank, NodeIndex target,
                             const GeoTable& geo, double beta, std::uint64_t seed, std::size_t t_max) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw Error(ErrorCode::InvalidArgument, "dagger beta must lie in [0,1]");
    // Separate streams: the policy stream matches run_episode's sample stream.
    Rng policy_rng(derive_seed(seed, task.instruction().id));
    Rng mix_rng(derive_seed(seed, task.instruction().id + "/mix"));

    DaggerRollout out;
    auto choose = [&](const NavState& s, const std::vector<NavAction>& actions) {
        const NavAction label = expert_action(task.env(), geo, s.current, target);
        const auto feats = action_features(s, actions);
        const auto it = std::find(actions.begin(), actions.end(), label);
        out.decisions.push_back(Decision{feats, static_cast<std::size_t>(it - actions.begin())});
        out.labels.push_back(label);
        if (mix_rng.bernoulli(beta)) return label;
        return actions[pick(action_dist(theta, feats), SelectMode::Sample, &policy_rng)];
    };
    out.episode = run_scripted(task, bank, t_max, choose);
    return out;
}

void write_episodes(const std::vector<Episode>& episodes, const EnvGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (const auto& ep : episodes) {
        nlohmann::ordered_json j;
        j["instr_id"] = ep.instr_id;
        auto traj = nlohmann::ordered_json::array();
        for (NodeIndex v : ep.trajectory) traj.push_back(g.id(v));
        j["trajectory"] = std::move(traj);
        j["T"] = ep.T;
        j["truncated"] = ep.truncated;
        j["terminal"] = g.id(ep.terminal);
        out << j.dump() << '\n';
    }
}

}  // namespace fbnav
