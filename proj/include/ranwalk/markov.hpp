// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <utility>

#include "ranwalk/errors.hpp"
#include "ranwalk/graph.hpp"
#include "ranwalk/matrix.hpp"

namespace ranwalk {

// Fixed tolerances for the random-walk contracts.
inline constexpr double kRowSumTol = 1e-12;           // row-stochasticity
inline constexpr double kDistributionSumTol = 1e-12;  // input distribution check
inline constexpr double kMassConservationTol = 1e-10;
inline constexpr double kStationarityTol = 1e-10;     // |pi - M^T pi|_inf
inline constexpr double kDetailedBalanceTol = 1e-12;

// Row-stochastic transition matrix M = D^{-1} A of the random walk.
// Construction rejects rows whose degree is zero and verifies every row sum.
class TransitionMatrix {
public:
    static TransitionMatrix from_adjacency(const Matrix& adjacency, const Vector& deg) {
        const std::size_t n = adjacency.rows();
        if (adjacency.cols() != n)
            throw DimensionMismatchError("transition_matrix: adjacency must be square");
        if (deg.size() != n)
            throw DimensionMismatchError("transition_matrix: degree vector size mismatch");
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!(deg[i] > 0.0)) throw IsolatedNodeError(i);
            double row_sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                m(i, j) = adjacency(i, j) / deg[i];
                row_sum += m(i, j);
            }
            if (std::abs(row_sum - 1.0) > kRowSumTol) throw NotStochasticError(i, row_sum);
        }
        return TransitionMatrix(std::move(m));
    }

    const Matrix& probabilities() const { return m_; }
    std::size_t size() const { return m_.rows(); }

private:
    explicit TransitionMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

inline TransitionMatrix transition_matrix(const Matrix& adjacency, const Vector& deg) {
    return TransitionMatrix::from_adjacency(adjacency, deg);
}

inline TransitionMatrix transition_matrix(const AttributedGraph& g) {
    return TransitionMatrix::from_adjacency(g.adjacency(), degrees(g));
}

// P_t = (M^T)^t P_0. Total mass is conserved up to rounding.
inline Vector evolve_distribution(const TransitionMatrix& m, const Vector& p0, std::size_t steps) {
    const std::size_t n = m.size();
    if (p0.size() != n)
        throw DimensionMismatchError("evolve_distribution: distribution size mismatch");
    double total = 0.0;
    for (double x : p0) {
        if (x < 0.0) throw Error("evolve_distribution: distribution has a negative entry");
        total += x;
    }
    if (std::abs(total - 1.0) > kDistributionSumTol)
        throw Error("evolve_distribution: distribution does not sum to 1");

    Vector p = p0;
    Vector next(n);
    const Matrix& prob = m.probabilities();
    for (std::size_t t = 0; t < steps; ++t) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = p[i];
            if (pi == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) next[j] += prob(i, j) * pi;
        }
        p.swap(next);
    }
    return p;
}

// pi_i = d_i / sum(d): the degree-proportional stationary point of the walk.
inline Vector stationary_from_degrees(const Vector& deg) {
    double total = 0.0;
    for (double d : deg) total += d;
    if (!(total > 0.0)) throw ZeroTotalDegreeError();
    Vector pi(deg.size());
    for (std::size_t i = 0; i < deg.size(); ++i) pi[i] = deg[i] / total;
    return pi;
}

// |pi - M^T pi|_inf
inline double stationarity_residual(const TransitionMatrix& m, const Vector& pi) {
    const Matrix& prob = m.probabilities();
    const std::size_t n = m.size();
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) acc += prob(i, j) * pi[i];
        worst = std::max(worst, std::abs(acc - pi[j]));
    }
    return worst;
}

// max over (i, j) of |pi_i p_ij - pi_j p_ji|
inline double detailed_balance_violation(const TransitionMatrix& m, const Vector& pi) {
    const Matrix& prob = m.probabilities();
    const std::size_t n = m.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            worst = std::max(worst, std::abs(pi[i] * prob(i, j) - pi[j] * prob(j, i)));
    return worst;
}

// Residuals for walk views whose adjacency may contain zero-degree rows
// (e.g. the loop-removed length-2 view of a path). Such rows carry no
// stationary mass and are treated as absorbing.
inline double stationarity_residual(const Matrix& adjacency, const Vector& pi) {
    const std::size_t n = adjacency.rows();
    const Vector deg = row_sums(adjacency);
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (deg[i] > 0.0)
                acc += adjacency(i, j) / deg[i] * pi[i];
            else if (i == j)
                acc += pi[i];
        }
        worst = std::max(worst, std::abs(acc - pi[j]));
    }
    return worst;
}

inline double detailed_balance_violation(const Matrix& adjacency, const Vector& pi) {
    const std::size_t n = adjacency.rows();
    const Vector deg = row_sums(adjacency);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double forward = deg[i] > 0.0 ? pi[i] * adjacency(i, j) / deg[i] : 0.0;
            const double backward = deg[j] > 0.0 ? pi[j] * adjacency(j, i) / deg[j] : 0.0;
            worst = std::max(worst, std::abs(forward - backward));
        }
    }
    return worst;
}

}  // namespace ranwalk
