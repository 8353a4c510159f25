#include "fbnav/synthlang.hpp"

#include <fstream>

#include "fbnav/rng.hpp"
#include "json.hpp"

namespace fbnav {

namespace {
constexpr int kMaxPairTries = 5000;
}

std::string synonym_token(const std::string& landmark, std::size_t variant) {
    return landmark + "#" + std::to_string(variant);
}

const std::string& StyleMap::token_for(const std::string& landmark) const {
    const auto it = to_token.find(landmark);
    if (it == to_token.end()) {
        throw Error(ErrorCode::UnknownId, "style '" + id + "' has no token for landmark '" + landmark + "'");
    }
    return it->second;
}

StyleMap make_style(std::string id, std::uint64_t seed, const std::vector<std::string>& base_vocab,
                    double synonym_rate) {
    if (base_vocab.empty()) throw Error(ErrorCode::InvalidArgument, "make_style: empty vocabulary");
    if (!(synonym_rate >= 0.0 && synonym_rate <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "make_style: synonym_rate must lie in [0,1]");
    }
    StyleMap style;
    style.id = std::move(id);
    style.seed = seed;
    style.synonym_rate = synonym_rate;
    for (const auto& lm : base_vocab) style.to_token.emplace(lm, lm);

    Rng rng(derive_seed(seed, "style"));
    for (auto& [lm, token] : style.to_token) {  // map order: sorted landmarks
        const bool swap = rng.bernoulli(synonym_rate);
        const std::size_t variant = rng.below(kSynonymVariants);
        if (swap) token = synonym_token(lm, variant);
    }
    return style;
}

Instruction generate_instruction(const EnvGraph& g, const StyleMap& style, std::uint64_t seed,
                                 LengthRange len_range, std::string id) {
    if (len_range.min < 2 || len_range.min > len_range.max) {
        throw Error(ErrorCode::InvalidArgument, "generate_instruction: need 2 <= min <= max");
    }
    Rng rng(seed);
    const auto n = static_cast<std::uint64_t>(g.node_count());
    for (int attempt = 0; attempt < kMaxPairTries; ++attempt) {
        const auto start = static_cast<NodeIndex>(rng.below(n));
        const auto goal = static_cast<NodeIndex>(rng.below(n));
        if (start == goal) continue;
        const NodePath path = shortest_path(g, start, goal);
        if (path.size() < len_range.min || path.size() > len_range.max) continue;

        Instruction instr;
        instr.id = std::move(id);
        instr.style = style.id;
        instr.start = g.id(start);
        instr.goal = g.id(goal);
        for (NodeIndex v : path) {
            const auto& lms = g.node(v).landmarks;
            instr.gt_path.push_back(g.id(v));
            instr.tokens.push_back(style.token_for(lms[rng.below(lms.size())]));
        }
        return instr;
    }
    throw Error(ErrorCode::GenerationExhausted,
                "no start/goal pair with " + std::to_string(len_range.min) + ".." +
                    std::to_string(len_range.max) + " path nodes in '" + g.name() + "'");
}

std::vector<Instruction> generate_instructions(const EnvGraph& g, const StyleMap& style, std::uint64_t seed,
                                               std::size_t count, LengthRange len_range,
                                               const std::string& prefix) {
    std::vector<Instruction> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(generate_instruction(g, style, derive_seed(seed, k), len_range,
                                           prefix + "-" + std::to_string(k)));
    }
    return out;
}

void write_instructions(const std::vector<Instruction>& instrs, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (const auto& in : instrs) {
        nlohmann::ordered_json j;
        j["id"] = in.id;
        j["style"] = in.style;
        j["tokens"] = in.tokens;
        j["start"] = in.start;
        j["goal"] = in.goal;
        j["gt_path"] = in.gt_path;
        out << j.dump() << '\n';
    }
}

std::vector<Instruction> read_instructions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<Instruction> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Instruction instr;
            instr.id = j.at("id").get<std::string>();
            instr.style = j.at("style").get<std::string>();
            instr.tokens = j.at("tokens").get<std::vector<std::string>>();
            instr.start = j.at("start").get<std::string>();
            instr.goal = j.at("goal").get<std::string>();
            instr.gt_path = j.at("gt_path").get<std::vector<std::string>>();
            out.push_back(std::move(instr));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::Parse, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace fbnav
