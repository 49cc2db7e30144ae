// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include "ranwalk/markov.hpp"
#include "ranwalk/spectral.hpp"
#include "testutil.hpp"

using namespace ranwalk;
using testutil::Rng;

namespace {

Matrix diag2(double a, double b) {
    Matrix m(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

double orthogonality_error(const Matrix& u) {
    return max_abs_diff(matmul(transpose(u), u), Matrix::identity(u.rows()));
}

AttributedGraph complete_graph(std::size_t n) {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
    return AttributedGraph(n, std::move(edges), Matrix(n, 1, 1.0));
}

}  // namespace

TEST_CASE("eigh of a diagonal matrix") {
    const SpectralDecomposition dec = eigh(diag2(2.0, 5.0));
    REQUIRE(dec.eigenvalues == Vector{2.0, 5.0});
    REQUIRE(max_abs_diff(dec.eigenvectors, Matrix::identity(2)) == 0.0);
}

TEST_CASE("P3 Laplacian spectrum is (0, 1, 3)") {
    const SpectralDecomposition dec = eigh(laplacian(testutil::p3()));
    const Vector expected{0.0, 1.0, 3.0};
    REQUIRE(max_abs_diff(dec.eigenvalues, expected) < 1e-8);
    // cross-check against the characteristic-polynomial oracle
    const Vector oracle = testutil::charpoly_eigenvalues(laplacian(testutil::p3()));
    REQUIRE(max_abs_diff(dec.eigenvalues, oracle) < 1e-8);
}

TEST_CASE("K3 Laplacian spectrum is (0, 3, 3)") {
    const SpectralDecomposition dec = eigh(laplacian(testutil::k3()));
    REQUIRE(max_abs_diff(dec.eigenvalues, Vector{0.0, 3.0, 3.0}) < 1e-8);
    const Vector oracle = testutil::charpoly_eigenvalues(laplacian(testutil::k3()));
    REQUIRE(max_abs_diff(dec.eigenvalues, oracle) < 1e-7);
}

TEST_CASE("eigh reconstruction and orthogonality on random symmetric matrices") {
    Rng rng(101);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.index(31);
        const Matrix a = testutil::random_symmetric(rng, n);
        const SpectralDecomposition dec = eigh(a);
        REQUIRE(max_abs_diff(reconstruct(dec), a) < 1e-8);
        REQUIRE(orthogonality_error(dec.eigenvectors) < 1e-9);
        for (std::size_t k = 1; k < n; ++k)
            REQUIRE(dec.eigenvalues[k - 1] <= dec.eigenvalues[k]);
    }
}

TEST_CASE("eigh matches the characteristic-polynomial oracle for n <= 4") {
    Rng rng(103);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + rng.index(3);
        const Matrix a = testutil::random_symmetric(rng, n);
        REQUIRE(max_abs_diff(eigh(a).eigenvalues, testutil::charpoly_eigenvalues(a)) < 1e-8);
    }
}

TEST_CASE("eigh is deterministic and sign-normalized") {
    Rng rng(107);
    const Matrix a = testutil::random_symmetric(rng, 9);
    const SpectralDecomposition first = eigh(a);
    const SpectralDecomposition second = eigh(a);
    REQUIRE(first.eigenvalues == second.eigenvalues);
    REQUIRE(first.eigenvectors == second.eigenvectors);
    for (std::size_t k = 0; k < 9; ++k) {
        double best = 0.0;
        for (std::size_t i = 0; i < 9; ++i)
            if (std::abs(first.eigenvectors(i, k)) > std::abs(best))
                best = first.eigenvectors(i, k);
        REQUIRE(best > 0.0);
    }
}

TEST_CASE("eigh rejects non-symmetric input") {
    Matrix a(2, 2);
    a(0, 1) = 1.0;
    a(1, 0) = 0.5;
    REQUIRE_THROWS_AS(eigh(a), NotSymmetricError);
}

TEST_CASE("fractional laplacian at gamma = 1 reproduces L") {
    Rng rng(109);
    for (int trial = 0; trial < 5; ++trial) {
        const AttributedGraph g = testutil::random_connected_graph(rng, 4 + rng.index(6), 1, false);
        const Matrix l = laplacian(g);
        REQUIRE(max_abs_diff(fractional_laplacian(l, 1.0).matrix, l) < 1e-8);
    }
}

TEST_CASE("complete-graph fractional laplacian is n^(gamma-1) L") {
    // K_n has the flat nonzero spectrum {n, ..., n}, so L^gamma = n^(gamma-1) L.
    for (std::size_t n : {3, 4, 5}) {
        const Matrix l = laplacian(complete_graph(n));
        for (double gamma : {0.1, 0.5, 0.9}) {
            const FractionalLaplacian fl = fractional_laplacian(l, gamma);
            Matrix expected = l;
            const double factor = std::pow(static_cast<double>(n), gamma - 1.0);
            for (double& v : expected.values()) v *= factor;
            REQUIRE(max_abs_diff(fl.matrix, expected) < 1e-8);
        }
    }
}

TEST_CASE("K3 0.1-power has off-diagonals 3^(-0.9) within 1e-8") {
    const FractionalLaplacian fl = fractional_laplacian(laplacian(testutil::k3()), 0.1);
    const double expected = -std::pow(3.0, -0.9);  // ~= -0.372041
    REQUIRE(std::abs(expected + 0.3720410580113015) < 1e-12);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) REQUIRE(fl.matrix(i, j) == Catch::Approx(expected).margin(1e-8));
}

TEST_CASE("semigroup property: (L^0.5)^2 = L") {
    Rng rng(113);
    for (int trial = 0; trial < 10; ++trial) {
        const AttributedGraph g =
            testutil::random_connected_graph(rng, 3 + rng.index(10), 1, trial % 2 == 0);
        const Matrix l = laplacian(g);
        const Matrix half = fractional_laplacian(l, 0.5).matrix;
        REQUIRE(max_abs_diff(matmul(half, half), l) < 1e-7);
    }
}

TEST_CASE("P3 0.5-power spectrum is (0, 1, sqrt 3)") {
    const FractionalLaplacian fl = fractional_laplacian(laplacian(testutil::p3()), 0.5);
    const Vector expected{0.0, 1.0, std::sqrt(3.0)};
    REQUIRE(max_abs_diff(eigh(fl.matrix).eigenvalues, expected) < 1e-8);
}

TEST_CASE("gamma range and PSD guards") {
    const Matrix l = laplacian(testutil::p3());
    REQUIRE_THROWS_AS(fractional_laplacian(l, 0.0), GammaOutOfRangeError);
    REQUIRE_THROWS_AS(fractional_laplacian(l, -0.1), GammaOutOfRangeError);
    REQUIRE_THROWS_AS(fractional_laplacian(l, 1.5), GammaOutOfRangeError);
    REQUIRE_THROWS_AS(fractional_laplacian(diag2(-1.0, 2.0), 0.5), NotPsdError);
}

TEST_CASE("gamma adjacency identities") {
    Rng rng(127);
    const AttributedGraph g = testutil::random_connected_graph(rng, 7, 1, false);
    const Matrix a = g.adjacency();
    const Matrix a1 = gamma_adjacency(fractional_laplacian(laplacian(g), 1.0));
    REQUIRE(max_abs_diff(a1, a) < 1e-10);

    const Matrix ag = gamma_adjacency(fractional_laplacian(laplacian(testutil::k3()), 0.1));
    const double expected = std::pow(3.0, -0.9);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(ag(i, i) == 0.0);
        for (std::size_t j = 0; j < 3; ++j)
            if (i != j) REQUIRE(ag(i, j) == Catch::Approx(expected).margin(1e-8));
    }

    // the fractional walk links non-adjacent nodes of P3
    const Matrix p3g = gamma_adjacency(fractional_laplacian(laplacian(testutil::p3()), 0.1));
    REQUIRE(p3g(0, 2) > 0.01);
}

TEST_CASE("gamma adjacency flags genuinely negative off-diagonals") {
    FractionalLaplacian broken{0.5, Matrix(2, 2)};
    broken.matrix(0, 1) = broken.matrix(1, 0) = 0.5;  // A_gamma entry would be -0.5
    REQUIRE_THROWS_AS(gamma_adjacency(broken), NegativeOffDiagonalError);
}

TEST_CASE("gamma stationary distribution") {
    for (double gamma : {0.1, 0.5, 1.0}) {
        const Vector pi = gamma_stationary(fractional_laplacian(laplacian(testutil::k3()), gamma));
        for (double x : pi) REQUIRE(x == Catch::Approx(1.0 / 3.0).margin(1e-12));
    }

    // gamma = 1 equals the degree formula
    Rng rng(131);
    const AttributedGraph g = testutil::random_connected_graph(rng, 8, 1, false);
    const Vector via_gamma = gamma_stationary(fractional_laplacian(laplacian(g), 1.0));
    const Vector via_degrees = stationary_from_degrees(degrees(g));
    REQUIRE(max_abs_diff(via_gamma, via_degrees) < 1e-10);

    const Vector p3pi = gamma_stationary(fractional_laplacian(laplacian(testutil::p3()), 0.1));
    REQUIRE(p3pi[1] > p3pi[0]);
    REQUIRE(std::abs(p3pi[0] - p3pi[2]) < 1e-12);
    REQUIRE(std::abs(sum(p3pi) - 1.0) < 1e-12);

    REQUIRE_THROWS_AS(gamma_stationary(FractionalLaplacian{0.5, Matrix(3, 3)}), ZeroTraceError);
}

TEST_CASE("fractional stationarity: pi_g = M_g^T pi_g") {
    Rng rng(137);
    for (int trial = 0; trial < 20; ++trial) {
        const AttributedGraph g =
            testutil::random_connected_graph(rng, 3 + rng.index(10), 1, trial % 2 == 0);
        for (double gamma : {0.1, 0.5, 0.9}) {
            const FractionalLaplacian fl = fractional_laplacian(laplacian(g), gamma);
            REQUIRE(gamma_stationarity_residual(fl) < 1e-9);
        }
    }
}

TEST_CASE("laplacians and fractional powers are positive semidefinite") {
    Rng rng(149);
    for (int trial = 0; trial < 15; ++trial) {
        const AttributedGraph g =
            testutil::random_connected_graph(rng, 2 + rng.index(12), 1, trial % 2 == 0);
        const Matrix l = laplacian(g);
        REQUIRE(eigh(l).eigenvalues.front() >= -1e-9);
        const FractionalLaplacian fl = fractional_laplacian(l, 0.1 + 0.8 * rng.uniform());
        REQUIRE(is_symmetric(fl.matrix, 1e-9));
        REQUIRE(eigh(fl.matrix).eigenvalues.front() >= -1e-9);
    }
}

TEST_CASE("non-finite input surfaces as NoConvergence") {
    Matrix bad(3, 3);
    bad(0, 1) = bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(eigh(bad), NoConvergenceError);
}

TEST_CASE("L^gamma is permutation-equivariant (repeated eigenvalues included)") {
    // C4 has a repeated Laplacian eigenvalue; L^gamma must not depend on the
    // eigenbasis the solver happens to pick.
    AttributedGraph c4(4, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {0, 3, 1.0}}, Matrix(4, 1, 1.0));
    Rng rng(139);
    const auto sigma = testutil::random_permutation(rng, 4);
    const AttributedGraph h = testutil::permute_graph(c4, sigma);
    const Matrix lg = fractional_laplacian(laplacian(c4), 0.3).matrix;
    const Matrix lg_perm = fractional_laplacian(laplacian(h), 0.3).matrix;
    REQUIRE(max_abs_diff(lg_perm, testutil::permute_square(lg, sigma)) < 1e-9);
}
