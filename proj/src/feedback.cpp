#include "fbnav/feedback.hpp"

#include <fstream>

#include "json.hpp"

namespace fbnav {

std::string_view to_string(EndpointKind k) { return k == EndpointKind::Corrected ? "corrected" : "confirmed"; }

FeedbackResult feedback_fn(NodeIndex v_terminal, NodeIndex v_goal) {
    if (v_terminal != v_goal) return {v_goal, EndpointKind::Corrected};
    return {v_terminal, EndpointKind::Confirmed};
}

AdaptDataset AdaptDataset::head(std::size_t n) const {
    AdaptDataset out;
    const std::size_t k = std::min(n, samples_.size());
    out.samples_.assign(samples_.begin(), samples_.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
}

std::optional<NodePath> lift(const Episode& ep, NodeIndex endpoint, const MemoryBank& m) {
    if (ep.trajectory.empty() || !m.has_node(ep.trajectory.front())) {
        throw Error(ErrorCode::Contract, "lift: episode start is not in the memory bank");
    }
    return astar_path(m, ep.trajectory.front(), endpoint);
}

bool length_filter(const NodePath& tau, LengthRange bounds) {
    return tau.size() >= bounds.min && tau.size() <= bounds.max;
}

double CollectStats::rejection_rate() const {
    const std::size_t feasible = rejected + kept;
    return feasible == 0 ? 0.0 : static_cast<double>(rejected) / static_cast<double>(feasible);
}

double CollectStats::feasibility_rate() const {
    return episodes == 0 ? 0.0 : static_cast<double>(episodes - infeasible) / static_cast<double>(episodes);
}

std::pair<AdaptDataset, CollectStats> collect(const EnvGraph& g, std::span<const Episode> episodes,
                                              std::span<const Instruction> instructions, const MemoryBank& m,
                                              const CollectOptions& opts) {
    if (episodes.size() != instructions.size()) {
        throw Error(ErrorCode::InvalidArgument, "collect: one instruction per episode required");
    }
    AdaptDataset data;
    CollectStats stats;
    stats.episodes = episodes.size();
    for (std::size_t k = 0; k < episodes.size(); ++k) {
        const auto fb = feedback_fn(episodes[k].terminal, g.index_of(instructions[k].goal));
        ++(fb.kind == EndpointKind::Confirmed ? stats.confirmed : stats.corrected);
        auto tau = lift(episodes[k], fb.endpoint, m);
        if (!tau) {
            ++stats.infeasible;
            continue;
        }
        if (!length_filter(*tau, opts.bounds)) {
            ++stats.rejected;
            continue;
        }
        ++stats.kept;
        data.append(FeedbackSample{instructions[k], std::move(*tau), fb.kind, opts.session});
    }
    return {std::move(data), stats};
}

void write_dataset(const AdaptDataset& d, const EnvGraph& g, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (const auto& s : d.samples()) {
        nlohmann::ordered_json j;
        j["instr_id"] = s.instruction.id;
        j["tokens"] = s.instruction.tokens;
        auto tau = nlohmann::ordered_json::array();
        for (NodeIndex v : s.tau_plus) tau.push_back(g.id(v));
        j["tau_plus"] = std::move(tau);
        j["kind"] = to_string(s.kind);
        j["session"] = s.session;
        j["style"] = s.instruction.style;
        out << j.dump() << '\n';
    }
}

AdaptDataset read_dataset(const std::filesystem::path& path, const EnvGraph& g) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    AdaptDataset d;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            FeedbackSample s;
            s.instruction.id = j.at("instr_id").get<std::string>();
            s.instruction.tokens = j.at("tokens").get<std::vector<std::string>>();
            s.instruction.style = j.at("style").get<std::string>();
            for (const auto& id : j.at("tau_plus")) s.tau_plus.push_back(g.index_of(id.get<std::string>()));
            if (s.tau_plus.empty()) throw Error(ErrorCode::Schema, "empty tau_plus");
            s.instruction.start = g.id(s.tau_plus.front());
            s.instruction.goal = g.id(s.tau_plus.back());
            const auto kind = j.at("kind").get<std::string>();
            if (kind != "corrected" && kind != "confirmed") throw Error(ErrorCode::Schema, "bad kind '" + kind + "'");
            s.kind = kind == "corrected" ? EndpointKind::Corrected : EndpointKind::Confirmed;
            s.session = j.at("session").get<std::string>();
            d.append(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return d;
}

}  // namespace fbnav
