// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "ranwalk/errors.hpp"
#include "ranwalk/matrix.hpp"

namespace ranwalk {

inline constexpr double kSymmetricInputTol = 1e-9;
inline constexpr double kJacobiOffDiagTol = 1e-12;  // relative to max(1, |A|_F)
inline constexpr int kJacobiMaxSweeps = 100;
inline constexpr double kEigenvalueClampFloor = -1e-9;       // PSD rounding noise
inline constexpr double kGammaAdjacencyClampFloor = -1e-9;   // clamp zone
inline constexpr double kGammaAdjacencyErrorFloor = -1e-6;   // beyond noise: solver failure

struct SpectralDecomposition {
    Vector eigenvalues;   // ascending
    Matrix eigenvectors;  // orthogonal; column k pairs with eigenvalues[k]
};

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t p = 0; p < a.rows(); ++p)
        for (std::size_t q = p + 1; q < a.cols(); ++q) s += a(p, q) * a(p, q);
    return std::sqrt(2.0 * s);
}

}  // namespace detail

// Cyclic Jacobi eigendecomposition of a dense symmetric matrix.
//
// The sweep order is fixed and each eigenvector is sign-normalized so that
// its largest-magnitude entry is positive, which makes the output
// bit-reproducible for identical input. Unconditionally convergent for
// symmetric matrices; NoConvergence after kJacobiMaxSweeps signals a bug or
// a non-finite input rather than a hard case.
inline SpectralDecomposition eigh(const Matrix& input) {
    const std::size_t n = input.rows();
    if (input.cols() != n) throw DimensionMismatchError("eigh: matrix must be square");
    if (n == 0) return {};
    {
        const double asym = max_asymmetry(input);
        if (asym > kSymmetricInputTol) throw NotSymmetricError(asym);
    }

    Matrix a = input;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = a(j, i) = v;
        }
    Matrix u = Matrix::identity(n);
    const double stop = kJacobiOffDiagTol * std::max(1.0, frobenius_norm(a));

    bool converged = detail::off_diagonal_norm(a) <= stop;
    for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e7) {
                    t = 1.0 / (2.0 * theta);
                } else {
                    t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0) t = -t;
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                a(p, p) -= t * apq;
                a(q, q) += t * apq;
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = a(p, k) = akp - s * (akq + tau * akp);
                    a(k, q) = a(q, k) = akq + s * (akp - tau * akq);
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double ukp = u(k, p);
                    const double ukq = u(k, q);
                    u(k, p) = ukp - s * (ukq + tau * ukp);
                    u(k, q) = ukq + s * (ukp - tau * ukq);
                }
            }
        }
        converged = detail::off_diagonal_norm(a) <= stop;
    }
    if (!converged) throw NoConvergenceError(kJacobiMaxSweeps);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&a](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

    SpectralDecomposition out{Vector(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t src = order[k];
        out.eigenvalues[k] = a(src, src);
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double mag = std::abs(u(i, src));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const double flip = u(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.eigenvectors(i, k) = flip * u(i, src);
    }
    return out;
}

// U diag(values) U^T, accumulated over the upper triangle and mirrored so the
// result is exactly symmetric.
inline Matrix reconstruct(const Matrix& u, const Vector& values) {
    const std::size_t n = u.rows();
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += values[k] * u(i, k) * u(j, k);
            m(i, j) = m(j, i) = s;
        }
    }
    return m;
}

inline Matrix reconstruct(const SpectralDecomposition& dec) {
    return reconstruct(dec.eigenvectors, dec.eigenvalues);
}

// Fractional power of a graph Laplacian: U diag(lambda^gamma) U^T with
// 0^gamma = 0. gamma = 1 is admitted as a sanity configuration.
struct FractionalLaplacian {
    double gamma = 1.0;
    Matrix matrix;
};

inline FractionalLaplacian fractional_laplacian(const Matrix& lap, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw GammaOutOfRangeError(gamma);
    SpectralDecomposition dec = eigh(lap);
    Vector powed(dec.eigenvalues.size());
    for (std::size_t k = 0; k < dec.eigenvalues.size(); ++k) {
        double lambda = dec.eigenvalues[k];
        if (lambda < kEigenvalueClampFloor) throw NotPsdError(lambda);
        // Zero the whole noise band, not just the negative side: a kernel
        // eigenvalue that comes back as +1e-17 would explode to ~0.02 under
        // a 0.1 power and poison every entry of L^gamma.
        if (lambda <= -kEigenvalueClampFloor) lambda = 0.0;
        powed[k] = lambda == 0.0 ? 0.0 : std::pow(lambda, gamma);
    }
    return {gamma, reconstruct(dec.eigenvectors, powed)};
}

// A_gamma = diag(L^gamma) - L^gamma: zero diagonal, symmetric, nonnegative.
// Off-diagonals of L^gamma are nonpositive for gamma in (0, 1], so a value
// past the error floor means the eigensolver produced garbage.
inline Matrix gamma_adjacency(const FractionalLaplacian& fl) {
    const std::size_t n = fl.matrix.rows();
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = -fl.matrix(i, j);
            if (v < kGammaAdjacencyErrorFloor) throw NegativeOffDiagonalError(-v);
            if (v < 0.0) v = 0.0;
            a(i, j) = a(j, i) = v;
        }
    }
    return a;
}

// pi_gamma = diag(L^gamma) / trace(L^gamma)
inline Vector gamma_stationary(const FractionalLaplacian& fl) {
    Vector d = diagonal(fl.matrix);
    for (double& x : d)
        if (x < 0.0) x = 0.0;  // rounding noise; true diagonal is nonnegative
    const double trace = sum(d);
    if (!(trace > 0.0)) throw ZeroTraceError();
    for (double& x : d) x /= trace;
    return d;
}

// |pi_g - M_g^T pi_g|_inf with M_g = diag(L^gamma)^{-1} A_gamma. The rows of
// M_g sum to 1 only up to reconstruction rounding, so this residual is
// computed directly instead of going through the strict TransitionMatrix
// contract.
inline double gamma_stationarity_residual(const FractionalLaplacian& fl) {
    const Matrix a = gamma_adjacency(fl);
    const Vector diag = diagonal(fl.matrix);
    const Vector pi = gamma_stationary(fl);
    const std::size_t n = a.rows();
    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (diag[i] > 0.0) acc += a(i, j) / diag[i] * pi[i];
        worst = std::max(worst, std::abs(acc - pi[j]));
    }
    return worst;
}

}  // namespace ranwalk
