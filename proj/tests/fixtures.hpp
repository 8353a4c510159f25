#pragma once

#include <string>
#include <vector>

#include "fbnav/envgraph.hpp"
#include "fbnav/synthlang.hpp"

namespace fixtures {

/// Unit-spaced line a-b-c-... along x with the given landmarks per node.
inline fbnav::EnvGraph line(const std::vector<std::vector<std::string>>& landmarks, std::string name = "line") {
    std::vector<fbnav::Viewpoint> nodes;
    std::vector<fbnav::EnvGraph::Edge> edges;
    for (std::size_t i = 0; i < landmarks.size(); ++i) {
        const std::string id(1, static_cast<char>('a' + i));
        nodes.push_back({id, {static_cast<double>(i), 0.0, 0.0}, landmarks[i]});
        if (i > 0) edges.emplace_back(std::string(1, static_cast<char>('a' + i - 1)), id);
    }
    return fbnav::EnvGraph(std::move(name), std::move(nodes), edges);
}

inline fbnav::EnvGraph line(std::size_t n, std::string name = "line") {
    std::vector<std::vector<std::string>> lms;
    for (std::size_t i = 0; i < n; ++i) lms.push_back({"lm" + std::to_string(i)});
    return line(lms, std::move(name));
}

inline fbnav::EnvGraph random_env(std::uint64_t seed, std::size_t n,
                                  fbnav::GraphModel model = fbnav::GraphModel::RandomGeometric) {
    fbnav::GeneratorParams p;
    p.seed = seed;
    p.n_nodes = n;
    p.model = model;
    return fbnav::generate_env(p);
}

inline fbnav::Instruction instruction(const std::vector<std::string>& path,
                                      std::vector<std::string> tokens, std::string id = "i0",
                                      std::string style = "basic") {
    fbnav::Instruction in;
    in.id = std::move(id);
    in.style = std::move(style);
    in.tokens = std::move(tokens);
    in.start = path.front();
    in.goal = path.back();
    in.gt_path = path;
    return in;
}

}  // namespace fixtures

#define EXPECT_FBNAV_ERROR(stmt, expected_code)                                 \
    do {                                                                        \
        try {                                                                   \
            stmt;                                                               \
            ADD_FAILURE() << "expected fbnav::Error from " #stmt;               \
        } catch (const fbnav::Error& e) {                                       \
            EXPECT_EQ(e.code(), expected_code) << e.what();                     \
        }                                                                       \
    } while (0)
