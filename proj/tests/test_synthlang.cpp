#include <gtest/gtest.h>

#include <filesystem>
#include <set>

#include "fbnav/synthlang.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fbnav;

TEST(Style, ZeroRateIsIdentity) {
    const auto vocab = default_landmark_vocab();
    const StyleMap s = make_style("basic", 5, vocab, 0.0);
    for (const auto& lm : vocab) EXPECT_EQ(s.token_for(lm), lm);
}

TEST(Style, FullRateNeverMapsToItselfAndStaysDisjoint) {
    const auto vocab = default_landmark_vocab();
    const std::set<std::string> base(vocab.begin(), vocab.end());
    const StyleMap s = make_style("u", 5, vocab, 1.0);
    for (const auto& lm : vocab) {
        EXPECT_NE(s.token_for(lm), lm);
        EXPECT_FALSE(base.contains(s.token_for(lm)));
        EXPECT_EQ(s.token_for(lm).rfind(lm + "#", 0), 0u);
    }
}

TEST(Style, DeterministicPerSeed) {
    const auto vocab = default_landmark_vocab();
    EXPECT_EQ(make_style("u", 9, vocab, 0.5), make_style("u", 9, vocab, 0.5));
    EXPECT_FBNAV_ERROR(make_style("u", 9, vocab, 0.5).token_for("spaceship"), ErrorCode::UnknownId);
}

TEST(Style, OverlapWithBasicTracksRate) {
    std::vector<std::string> vocab;
    for (int i = 0; i < 4000; ++i) vocab.push_back("w" + std::to_string(i));
    for (double rate : {0.2, 0.8}) {
        const StyleMap s = make_style("u", 11, vocab, rate);
        double same = 0;
        for (const auto& w : vocab) same += s.token_for(w) == w;
        EXPECT_NEAR(same / 4000.0, 1.0 - rate, 0.03);
    }
}

TEST(Instruction, LengthRangeAndTokensOnePerNode) {
    const EnvGraph g = fixtures::random_env(2, 60);
    const StyleMap basic = make_style("basic", 0, g.landmark_vocab(), 0.0);
    const auto instrs = generate_instructions(g, basic, 3, 200, {5, 7}, "t");
    for (const auto& in : instrs) {
        EXPECT_GE(in.gt_path.size(), 5u);
        EXPECT_LE(in.gt_path.size(), 7u);
        ASSERT_EQ(in.tokens.size(), in.gt_path.size());
        EXPECT_EQ(in.gt_path.front(), in.start);
        EXPECT_EQ(in.gt_path.back(), in.goal);
        for (std::size_t k = 0; k < in.tokens.size(); ++k) {
            const auto& lms = g.node(g.index_of(in.gt_path[k])).landmarks;
            EXPECT_NE(std::find(lms.begin(), lms.end(), in.tokens[k]), lms.end());
        }
    }
}

TEST(Instruction, GroundTruthPathsAreShortestOnGrid) {
    const EnvGraph g = fixtures::random_env(1, 25, GraphModel::Grid);
    const StyleMap basic = make_style("basic", 0, g.landmark_vocab(), 0.0);
    const auto instrs = generate_instructions(g, basic, 4, 500, {5, 7}, "g");
    for (const auto& in : instrs) {
        NodePath p;
        for (const auto& id : in.gt_path) p.push_back(g.index_of(id));
        for (std::size_t i = 1; i < p.size(); ++i) ASSERT_TRUE(g.has_edge(p[i - 1], p[i]));
        EXPECT_NEAR(path_weight(g, p), oracle::dijkstra(g, p.front(), p.back()), 1e-9);
    }
}

TEST(Instruction, StyledTokensGoThroughTheMap) {
    const EnvGraph g = fixtures::random_env(2, 40);
    const StyleMap user = make_style("u", 3, g.landmark_vocab(), 1.0);
    const auto in = generate_instruction(g, user, 8, {5, 7}, "x");
    for (const auto& tok : in.tokens) EXPECT_NE(tok.find('#'), std::string::npos);
    EXPECT_EQ(in.style, "u");
}

TEST(Instruction, ExhaustedWhenNoPairFits) {
    const EnvGraph g = fixtures::line(3);
    const StyleMap basic = make_style("basic", 0, g.landmark_vocab(), 0.0);
    EXPECT_FBNAV_ERROR(generate_instruction(g, basic, 1, {5, 7}, "x"), ErrorCode::GenerationExhausted);
}

TEST(Instruction, DeterministicAndRoundTripsThroughJsonl) {
    const EnvGraph g = fixtures::random_env(2, 40);
    const StyleMap basic = make_style("basic", 0, g.landmark_vocab(), 0.0);
    const auto a = generate_instructions(g, basic, 6, 20, {5, 7}, "r");
    EXPECT_EQ(a, generate_instructions(g, basic, 6, 20, {5, 7}, "r"));
    const auto path = std::filesystem::temp_directory_path() / "fbnav_instr_test.jsonl";
    write_instructions(a, path);
    EXPECT_EQ(read_instructions(path), a);
    std::filesystem::remove(path);
}
