#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fbnav/envgraph.hpp"

namespace fbnav {

/// Number of style-specific synonym variants per landmark. Synonyms are
/// named "<landmark>#<k>", so two styles that pick the same variant agree.
inline constexpr std::size_t kSynonymVariants = 3;

std::string synonym_token(const std::string& landmark, std::size_t variant);

/// How one user refers to landmarks: landmark token -> instruction token.
struct StyleMap {
    std::string id;
    std::uint64_t seed = 0;
    double synonym_rate = 0.0;
    std::map<std::string, std::string> to_token;

    /// Throws Error(UnknownId) for a landmark outside the style's vocabulary.
    const std::string& token_for(const std::string& landmark) const;

    friend bool operator==(const StyleMap&, const StyleMap&) = default;
};

/// Each landmark maps to a random synonym variant with probability
/// synonym_rate, otherwise to itself.
StyleMap make_style(std::string id, std::uint64_t seed, const std::vector<std::string>& base_vocab,
                    double synonym_rate);

struct Instruction {
    std::string id;
    std::string style;
    std::vector<std::string> tokens;  // one landmark cue per gt_path node
    std::string start;
    std::string goal;
    std::vector<std::string> gt_path;

    friend bool operator==(const Instruction&, const Instruction&) = default;
};

struct LengthRange {
    std::size_t min = 5;
    std::size_t max = 7;
};

/// Samples (start, goal) with a shortest path of min..max nodes and reads
/// one style-mapped landmark off every path node. Throws
/// Error(GenerationExhausted) if no pair qualifies within the retry budget.
Instruction generate_instruction(const EnvGraph& g, const StyleMap& style, std::uint64_t seed,
                                 LengthRange len_range, std::string id);

/// `count` instructions with ids "<prefix>-<k>", each from its own derived seed.
std::vector<Instruction> generate_instructions(const EnvGraph& g, const StyleMap& style, std::uint64_t seed,
                                               std::size_t count, LengthRange len_range,
                                               const std::string& prefix);

// Instruction dataset, JSON Lines.
void write_instructions(const std::vector<Instruction>& instrs, const std::filesystem::path& path);
std::vector<Instruction> read_instructions(const std::filesystem::path& path);

}  // namespace fbnav
