#include "fbnav/session.hpp"

#include <algorithm>

namespace fbnav {

const StyleMap& style_of(const StyleBook& styles, const Instruction& instr) {
    const auto it = styles.find(instr.style);
    if (it == styles.end()) {
        throw Error(ErrorCode::UnknownId, "instruction '" + instr.id + "' uses unknown style '" + instr.style + "'");
    }
    return it->second;
}

DeployResult deploy(const Scenario& sc, std::span<const double> theta, std::span<const Instruction> instructions,
                    MemoryBank& bank, const std::string& session) {
    DeployResult out;
    std::vector<EpisodeMetrics> rows;
    for (const auto& instr : instructions) {
        const Task task(instr, style_of(*sc.styles, instr), *sc.env, *sc.space);
        bank.observe(task.start());
        out.coverage_trace.push_back(coverage(bank, *sc.env));
        EpisodeStates states;
        auto choose = [&](const NavState& st, const std::vector<NavAction>& actions) {
            states.push_back(action_features(st, actions));
            const auto probs = action_dist(theta, states.back());
            return actions[static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin())];
        };
        Episode ep = run_scripted(task, bank, sc.t_max, choose);
        out.states.push_back(std::move(states));
        const auto fb = feedback_fn(ep.terminal, task.goal());
        out.online_feasible.push_back(lift(ep, fb.endpoint, bank).has_value());
        rows.push_back(episode_metrics(ep.trajectory, task.gt_path(), task.goal(), *sc.env, *sc.geo, sc.d_th));
        out.episodes.push_back(std::move(ep));
    }
    auto [data, stats] = collect(*sc.env, out.episodes, instructions, bank, {sc.filter, session});
    out.data = std::move(data);
    out.stats = stats;
    out.metrics = aggregate(std::move(rows));
    return out;
}

EvalResult evaluate(const Scenario& sc, std::span<const double> theta, std::span<const Instruction> instructions,
                    const MemoryBank& snapshot) {
    EvalResult out;
    std::vector<EpisodeMetrics> rows;
    const RolloutOptions opts{sc.t_max, SelectMode::Greedy, 0};
    for (const auto& instr : instructions) {
        const Task task(instr, style_of(*sc.styles, instr), *sc.env, *sc.space);
        MemoryBank bank = snapshot;
        Episode ep = run_episode(theta, task, bank, opts);
        rows.push_back(episode_metrics(ep.trajectory, task.gt_path(), task.goal(), *sc.env, *sc.geo, sc.d_th));
        out.episodes.push_back(std::move(ep));
    }
    out.metrics = aggregate(std::move(rows));
    return out;
}

std::vector<Demo> expert_demonstrations(const Scenario& sc, std::span<const Instruction> instructions) {
    std::vector<Demo> out;
    MemoryBank bank(*sc.env);
    for (const auto& instr : instructions) {
        const Task task(instr, style_of(*sc.styles, instr), *sc.env, *sc.space);
        Demo demo{instr.style, instr.id, {}};
        NavState s = initial_state(task, bank);
        const NodePath& path = task.gt_path();
        for (std::size_t t = 0; t < path.size(); ++t) {
            const NavAction a = t + 1 < path.size() ? NavAction::move(path[t + 1]) : NavAction::stop();
            demo.decisions.push_back(make_decision(s, a));
            if (!a.is_stop()) advance(s, a.target, bank, 1);
        }
        out.push_back(std::move(demo));
    }
    return out;
}

}  // namespace fbnav
