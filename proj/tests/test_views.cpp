// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "ranwalk/repair.hpp"
#include "ranwalk/views.hpp"
#include "testutil.hpp"

using namespace ranwalk;
using testutil::Rng;

TEST_CASE("walk1 view of P3") {
    const WalkView v = walk1_view(testutil::p3());
    REQUIRE(v.stationary == Vector{0.25, 0.5, 0.25});
    REQUIRE(v.scaled_features(0, 0) == 0.25);
    REQUIRE(v.scaled_features(1, 0) == 0.5);
    REQUIRE(v.scaled_features(2, 0) == 0.25);
    REQUIRE(max_abs_diff(v.adjacency, testutil::p3().adjacency()) == 0.0);
}

TEST_CASE("walk1 view of K3 with identity features") {
    const AttributedGraph g(3, testutil::k3().edges(), Matrix::identity(3));
    const WalkView v = walk1_view(g);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            REQUIRE(v.scaled_features(i, j) ==
                    (i == j ? Catch::Approx(1.0 / 3.0).margin(1e-15) : Catch::Approx(0.0)));
}

TEST_CASE("repairing a single unit edge yields the uniform triangle") {
    AttributedGraph g(2, {{0, 1, 1.0}}, Matrix(2, 1, 1.0));
    const WalkView v = walk1_view(repair(g).graph);
    for (double x : v.stationary) REQUIRE(x == Catch::Approx(1.0 / 3.0).margin(1e-15));
}

TEST_CASE("walk2 view of K3 reproduces the adjacency") {
    // every pair of K3 nodes has exactly one open length-2 walk
    const WalkView v = walk2_view(testutil::k3());
    REQUIRE(max_abs_diff(v.adjacency, testutil::k3().adjacency()) == 0.0);
    for (double x : v.stationary) REQUIRE(x == Catch::Approx(1.0 / 3.0).margin(1e-15));
}

TEST_CASE("walk2 view of P3 keeps only the endpoint pair") {
    const WalkView v = walk2_view(testutil::p3());
    Matrix expected(3, 3);
    expected(0, 2) = expected(2, 0) = 1.0;
    REQUIRE(max_abs_diff(v.adjacency, expected) == 0.0);
    REQUIRE(v.stationary == Vector{0.5, 0.0, 0.5});
    REQUIRE(v.scaled_features(1, 0) == 0.0);
}

TEST_CASE("walk2 view of the star isolates the center") {
    const WalkView v = walk2_view(testutil::star4());
    for (std::size_t l = 1; l < 4; ++l) {
        REQUIRE(v.adjacency(0, l) == 0.0);
        for (std::size_t m = l + 1; m < 4; ++m) REQUIRE(v.adjacency(l, m) == 1.0);
    }
    REQUIRE(v.stationary[0] == 0.0);
    for (std::size_t l = 1; l < 4; ++l)
        REQUIRE(v.stationary[l] == Catch::Approx(1.0 / 3.0).margin(1e-15));
}

TEST_CASE("walk2 preconditions") {
    AttributedGraph tiny(2, {{0, 1, 1.0}}, Matrix(2, 1, 1.0));
    REQUIRE_THROWS_AS(walk2_view(tiny), TooSmallError);
    // an edge plus an isolated node has no open length-2 walks at all
    AttributedGraph degenerate(3, {{0, 1, 1.0}}, Matrix(3, 1, 1.0));
    REQUIRE_THROWS_AS(walk2_view(degenerate), ZeroTotalDegreeError);
}

TEST_CASE("walk_gamma at gamma = 1 reproduces walk1") {
    Rng rng(41);
    for (int trial = 0; trial < 10; ++trial) {
        const AttributedGraph g =
            testutil::random_connected_graph(rng, 3 + rng.index(9), 2, trial % 2 == 0);
        const WalkView w1 = walk1_view(g);
        const WalkView wg = walk_gamma_view(g, 1.0);
        REQUIRE(max_abs_diff(wg.adjacency, w1.adjacency) < kGammaOneAdjacencyTol);
        REQUIRE(max_abs_diff(wg.stationary, w1.stationary) < kGammaOneStationaryTol);
    }
}

TEST_CASE("walk_gamma view of K3 with ones features") {
    const WalkView v = walk_gamma_view(testutil::k3(), 0.1);
    for (std::size_t i = 0; i < 3; ++i)
        REQUIRE(v.scaled_features(i, 0) == Catch::Approx(1.0 / 3.0).margin(1e-12));
}

TEST_CASE("walk_gamma view of P3 links the endpoints") {
    const WalkView v = walk_gamma_view(testutil::p3(), 0.1);
    REQUIRE(v.adjacency(0, 2) > 0.01);
    REQUIRE(std::abs(v.stationary[0] - v.stationary[2]) < 1e-12);
    REQUIRE(std::abs(sum(v.stationary) - 1.0) < kDistributionSumTol);
}

TEST_CASE("brute-force walk counts on the canonical fixtures") {
    REQUIRE(count_walks_bruteforce(testutil::p3(), 2, 0, 2) == 1.0);
    REQUIRE(count_walks_bruteforce(testutil::k3(), 2, 0, 0) == 2.0);
    REQUIRE(count_walks_bruteforce(testutil::p3(), 2, 1, 1) == 2.0);
    REQUIRE_THROWS_AS(count_walks_bruteforce(testutil::p3(), 7, 0, 0), OracleScaleExceededError);
    Rng rng(43);
    const AttributedGraph big = testutil::random_connected_graph(rng, 9, 1, true);
    REQUIRE_THROWS_AS(count_walks_bruteforce(big, 2, 0, 0), OracleScaleExceededError);
}

TEST_CASE("walk2 adjacency equals brute-force counts exactly, zero diagonal") {
    Rng rng(47);
    for (int trial = 0; trial < 25; ++trial) {
        const std::size_t n = 3 + rng.index(6);
        const AttributedGraph g = testutil::random_connected_graph(rng, n, 1, true);
        const WalkView v = walk2_view(g);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j)
                    REQUIRE(v.adjacency(i, j) == 0.0);
                else
                    REQUIRE(v.adjacency(i, j) == count_walks_bruteforce(g, 2, i, j));
            }
        // pi_2 mass is zero exactly on nodes without open length-2 walks
        const Vector deg2 = row_sums(v.adjacency);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE((deg2[i] == 0.0) == (v.stationary[i] == 0.0));
    }
}

TEST_CASE("brute-force counts agree with matrix powers up to k = 6") {
    Rng rng(53);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t n = 3 + rng.index(5);
        const AttributedGraph g = testutil::random_connected_graph(rng, n, 1, trial % 2 == 0);
        const Matrix a = g.adjacency();
        Matrix power = a;
        for (std::size_t k = 1; k <= 4; ++k) {
            if (k > 1) power = matmul(power, a);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    REQUIRE(count_walks_bruteforce(g, k, i, j) ==
                            Catch::Approx(power(i, j)).epsilon(1e-12).margin(1e-12));
        }
    }
}

TEST_CASE("scaled features are exact row scalings and stationaries sum to one") {
    Rng rng(59);
    for (int trial = 0; trial < 15; ++trial) {
        const AttributedGraph g =
            testutil::random_connected_graph(rng, 3 + rng.index(8), 3, false);
        const ViewSet views = build_views(g, true, true, true, 0.1);
        for (const WalkView* v : {&*views.walk1, &*views.walk2, &*views.walk_gamma}) {
            REQUIRE(std::abs(sum(v->stationary) - 1.0) < kDistributionSumTol);
            for (std::size_t i = 0; i < g.node_count(); ++i)
                for (std::size_t j = 0; j < g.feature_dim(); ++j)
                    REQUIRE(v->scaled_features(i, j) == v->stationary[i] * g.features()(i, j));
        }
    }
}

TEST_CASE("all three views are permutation-equivariant") {
    Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 3 + rng.index(7);
        const AttributedGraph g = testutil::random_connected_graph(rng, n, 2, trial % 2 == 0);
        const auto sigma = testutil::random_permutation(rng, n);
        const AttributedGraph h = testutil::permute_graph(g, sigma);
        const ViewSet vg = build_views(g, true, true, true, 0.1);
        const ViewSet vh = build_views(h, true, true, true, 0.1);
        const std::pair<const WalkView*, const WalkView*> pairs[] = {
            {&*vg.walk1, &*vh.walk1}, {&*vg.walk2, &*vh.walk2},
            {&*vg.walk_gamma, &*vh.walk_gamma}};
        for (const auto& [orig, perm] : pairs) {
            REQUIRE(max_abs_diff(perm->adjacency, testutil::permute_square(orig->adjacency, sigma)) <
                    1e-12);
            REQUIRE(max_abs_diff(perm->stationary, testutil::permute_vector(orig->stationary, sigma)) <
                    1e-12);
            REQUIRE(max_abs_diff(perm->scaled_features,
                                 testutil::permute_rows(orig->scaled_features, sigma)) < 1e-12);
        }
    }
}
