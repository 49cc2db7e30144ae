// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>

#include "ranwalk/errors.hpp"
#include "ranwalk/graph.hpp"
#include "ranwalk/markov.hpp"
#include "ranwalk/matrix.hpp"
#include "ranwalk/spectral.hpp"

namespace ranwalk {

// Consistency tolerances between the fractional machinery and the plain walk.
inline constexpr double kGammaStationarityTol = 1e-9;    // |pi_g - M_g^T pi_g|_inf
inline constexpr double kGammaOneAdjacencyTol = 1e-9;    // A_{gamma=1} vs A
inline constexpr double kGammaOneStationaryTol = 1e-10;  // pi_{gamma=1} vs pi_1

enum class WalkKind { walk1, walk2, walk_gamma };

inline std::string to_string(WalkKind k) {
    switch (k) {
        case WalkKind::walk1: return "walk1";
        case WalkKind::walk2: return "walk2";
        case WalkKind::walk_gamma: return "walk_gamma";
    }
    return "walk1";
}

inline WalkKind walk_kind_from_string(const std::string& s) {
    if (s == "walk1") return WalkKind::walk1;
    if (s == "walk2") return WalkKind::walk2;
    if (s == "walk_gamma") return WalkKind::walk_gamma;
    throw ParseError("unknown walk kind \"" + s + "\"");
}

// One enriched input unit: the walk adjacency, its stationary distribution,
// and the stationary-scaled node features diag(pi) X.
struct WalkView {
    WalkKind kind = WalkKind::walk1;
    double gamma = 0.0;  // meaningful for walk_gamma only
    Matrix adjacency;
    Vector stationary;
    Matrix scaled_features;
};

// A_1 = A, pi_1 proportional to degrees, X_1 = diag(pi_1) X.
inline WalkView walk1_view(const AttributedGraph& g) {
    Vector pi = stationary_from_degrees(degrees(g));
    Matrix scaled = scale_rows(pi, g.features());
    return {WalkKind::walk1, 0.0, g.adjacency(), std::move(pi), std::move(scaled)};
}

// A_2 = A^2 - diag(A^2): length-2 walk counts with closed walks removed.
// The stationary distribution is the degree formula applied to A_2, which
// places mass 0 on nodes with no open length-2 walk (A_2 itself may be
// disconnected; that is accepted).
inline WalkView walk2_view(const AttributedGraph& g) {
    const std::size_t n = g.node_count();
    if (n < 3) throw TooSmallError(n);
    const Matrix a = g.adjacency();
    Matrix a2 = matmul(a, a);
    for (std::size_t i = 0; i < n; ++i) a2(i, i) = 0.0;
    Vector pi = stationary_from_degrees(row_sums(a2));
    Matrix scaled = scale_rows(pi, g.features());
    return {WalkKind::walk2, 0.0, std::move(a2), std::move(pi), std::move(scaled)};
}

// Fractional walk view from the gamma power of the Laplacian.
inline WalkView walk_gamma_view(const AttributedGraph& g, double gamma) {
    const FractionalLaplacian fl = fractional_laplacian(laplacian(g), gamma);
    Matrix a = gamma_adjacency(fl);
    Vector pi = gamma_stationary(fl);
    Matrix scaled = scale_rows(pi, g.features());
    return {WalkKind::walk_gamma, gamma, std::move(a), std::move(pi), std::move(scaled)};
}

inline constexpr std::size_t kOracleMaxNodes = 8;
inline constexpr std::size_t kOracleMaxLength = 6;

// Brute-force weighted walk count: the sum, over every node sequence
// i = v(0), ..., v(k) = j with consecutive nodes adjacent, of the product of
// edge weights along the sequence. Equals (A^k)_ij by definition, but is
// computed without any matrix product so it can cross-check that path.
// Intermediate nodes are enumerated in ascending order, which for k = 2
// reproduces the dense matmul summation order exactly.
inline double count_walks_bruteforce(const AttributedGraph& g, std::size_t k,
                                     std::size_t i, std::size_t j) {
    const std::size_t n = g.node_count();
    if (k == 0 || k > kOracleMaxLength || n > kOracleMaxNodes)
        throw OracleScaleExceededError();
    if (i >= n || j >= n) throw DimensionMismatchError("count_walks_bruteforce: node index out of range");
    const Matrix a = g.adjacency();
    auto rec = [&](auto&& self, std::size_t v, std::size_t left) -> double {
        if (left == 1) return a(v, j);
        double total = 0.0;
        for (std::size_t u = 0; u < n; ++u)
            if (a(v, u) != 0.0) total += a(v, u) * self(self, u, left - 1);
        return total;
    };
    return rec(rec, i, k);
}

// The per-graph bundle of computed views; absent entries were not requested.
struct ViewSet {
    std::optional<WalkView> walk1;
    std::optional<WalkView> walk2;
    std::optional<WalkView> walk_gamma;
};

inline ViewSet build_views(const AttributedGraph& g, bool want1, bool want2, bool want_gamma,
                           double gamma) {
    ViewSet set;
    if (want1) set.walk1 = walk1_view(g);
    if (want2) set.walk2 = walk2_view(g);
    if (want_gamma) set.walk_gamma = walk_gamma_view(g, gamma);
    return set;
}

}  // namespace ranwalk
