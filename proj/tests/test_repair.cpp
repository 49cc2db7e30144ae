// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "ranwalk/repair.hpp"
#include "testutil.hpp"

using namespace ranwalk;
using testutil::Rng;

TEST_CASE("connected graphs with enough nodes pass through untouched") {
    const RepairResult r = repair(testutil::p3());
    REQUIRE(r.record.reason == RepairReason::none);
    REQUIRE(r.record.added_nodes.empty());
    REQUIRE(r.graph == testutil::p3());
}

TEST_CASE("disconnected graph gains one virtual node linked to every original node") {
    const AttributedGraph g = testutil::disconnected4();
    const RepairResult r = repair(g);
    REQUIRE(r.record.reason == RepairReason::disconnected);
    REQUIRE(r.record.original_node_count == 4);
    REQUIRE(r.record.added_nodes == std::vector<std::size_t>{4});
    REQUIRE(r.graph.node_count() == 5);
    REQUIRE(is_connected(r.graph));
    // unit edges from every original node to node 4
    const Matrix a = r.graph.adjacency();
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(a(i, 4) == 1.0);
    // zero feature row for the virtual node
    for (std::size_t j = 0; j < 2; ++j) REQUIRE(r.graph.features()(4, j) == 0.0);
    // original features and edges preserved verbatim
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            REQUIRE(r.graph.features()(i, j) == g.features()(i, j));
    REQUIRE(a(0, 1) == 1.0);
    REQUIRE(a(2, 3) == 2.0);
    REQUIRE(validate_graph(r.graph).ok());
}

TEST_CASE("two-node graph becomes a triangle") {
    AttributedGraph g(2, {{0, 1, 1.0}}, Matrix(2, 1, 1.0));
    const RepairResult r = repair(g);
    REQUIRE(r.record.reason == RepairReason::two_node);
    REQUIRE(r.graph.node_count() == 3);
    REQUIRE(r.graph.edges().size() == 3);
    REQUIRE(is_connected(r.graph));
    REQUIRE(r.graph.features()(2, 0) == 0.0);
}

TEST_CASE("two isolated nodes take the disconnected path") {
    AttributedGraph g(2, {}, Matrix(2, 1, 1.0));
    const RepairResult r = repair(g);
    REQUIRE(r.record.reason == RepairReason::disconnected);
    REQUIRE(r.graph.node_count() == 3);
    REQUIRE(is_connected(r.graph));
}

TEST_CASE("single node becomes a triangle with two virtual nodes") {
    AttributedGraph g(1, {}, Matrix(1, 1, 3.0));
    const RepairResult r = repair(g);
    REQUIRE(r.record.reason == RepairReason::single_node);
    REQUIRE(r.record.added_nodes == std::vector<std::size_t>{1, 2});
    REQUIRE(r.graph.node_count() == 3);
    REQUIRE(r.graph.edges().size() == 3);
    REQUIRE(is_connected(r.graph));
    REQUIRE(r.graph.features()(0, 0) == 3.0);
    REQUIRE(r.graph.features()(1, 0) == 0.0);
    REQUIRE(r.graph.features()(2, 0) == 0.0);
}

TEST_CASE("empty graph is rejected") {
    REQUIRE_THROWS_AS(repair(AttributedGraph(0, {}, Matrix(0, 1))), EmptyGraphError);
}

TEST_CASE("repair is idempotent and always yields a valid connected graph") {
    Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        AttributedGraph g = [&rng]() {
            const std::size_t n = 1 + rng.index(9);
            AttributedGraph base = testutil::random_connected_graph(rng, n, 2, false);
            if (rng.index(2) == 0 && n >= 2) {
                // drop all edges touching the last node to force disconnection
                std::vector<Edge> edges;
                for (const Edge& e : base.edges())
                    if (e.i != n - 1 && e.j != n - 1) edges.push_back(e);
                return AttributedGraph(n, std::move(edges), base.features());
            }
            return base;
        }();
        const RepairResult first = repair(g);
        REQUIRE(is_connected(first.graph));
        REQUIRE(first.graph.node_count() >= 3);
        REQUIRE(validate_graph(first.graph).ok());
        // original rows preserved exactly
        for (std::size_t i = 0; i < g.node_count(); ++i)
            for (std::size_t j = 0; j < g.feature_dim(); ++j)
                REQUIRE(first.graph.features()(i, j) == g.features()(i, j));
        // every original edge survives with its weight
        for (const Edge& e : g.edges()) {
            bool found = false;
            for (const Edge& f : first.graph.edges())
                found = found || (f.i == e.i && f.j == e.j && f.weight == e.weight);
            REQUIRE(found);
        }
        const RepairResult second = repair(first.graph);
        REQUIRE(second.record.reason == RepairReason::none);
        REQUIRE(second.graph == first.graph);
    }
}
