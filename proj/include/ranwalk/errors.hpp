// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ranwalk {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Fatal input-document problem (bad JSON, schema violation).
class ParseError : public Error {
public:
    using Error::Error;
};

class GraphTooLargeError : public Error {
public:
    explicit GraphTooLargeError(std::size_t n)
        : Error("graph exceeds the dense-representation guard of 4096 nodes (n = " +
                std::to_string(n) + ")"),
          node_count(n) {}
    std::size_t node_count;
};

class EmptyGraphError : public Error {
public:
    EmptyGraphError() : Error("graph has no nodes") {}
};

class IsolatedNodeError : public Error {
public:
    explicit IsolatedNodeError(std::size_t i)
        : Error("IsolatedNode: node " + std::to_string(i) +
                " has zero degree, its transition row is undefined"),
          node(i) {}
    std::size_t node;
};

class NotStochasticError : public Error {
public:
    explicit NotStochasticError(std::size_t row, double row_sum)
        : Error("transition row " + std::to_string(row) + " sums to " +
                std::to_string(row_sum) + ", not 1"),
          row(row) {}
    std::size_t row;
};

class ZeroTotalDegreeError : public Error {
public:
    ZeroTotalDegreeError()
        : Error("ZeroTotalDegree: all degrees are zero, stationary distribution undefined") {}
};

class NotSymmetricError : public Error {
public:
    explicit NotSymmetricError(double max_asymmetry)
        : Error("NotSymmetric: input matrix asymmetry " + std::to_string(max_asymmetry) +
                " exceeds tolerance"),
          max_asymmetry(max_asymmetry) {}
    double max_asymmetry;
};

class NoConvergenceError : public Error {
public:
    explicit NoConvergenceError(int sweeps)
        : Error("NoConvergence: Jacobi eigensolver did not converge in " +
                std::to_string(sweeps) + " sweeps"),
          sweeps(sweeps) {}
    int sweeps;
};

class NotPsdError : public Error {
public:
    explicit NotPsdError(double eigenvalue)
        : Error("NotPSD: eigenvalue " + std::to_string(eigenvalue) +
                " is below the clamping floor"),
          eigenvalue(eigenvalue) {}
    double eigenvalue;
};

class GammaOutOfRangeError : public Error {
public:
    explicit GammaOutOfRangeError(double gamma)
        : Error("GammaOutOfRange: gamma = " + std::to_string(gamma) +
                " is outside (0, 1]"),
          gamma(gamma) {}
    double gamma;
};

class NegativeOffDiagonalError : public Error {
public:
    explicit NegativeOffDiagonalError(double value)
        : Error("NegativeOffDiagonal: walk adjacency entry " + std::to_string(value) +
                " is negative beyond rounding noise (eigensolver failure?)"),
          value(value) {}
    double value;
};

class ZeroTraceError : public Error {
public:
    ZeroTraceError()
        : Error("ZeroTrace: fractional Laplacian has zero trace (edgeless graph)") {}
};

class TooSmallError : public Error {
public:
    explicit TooSmallError(std::size_t n)
        : Error("TooSmall: length-2 walk view needs at least 3 nodes, got " +
                std::to_string(n) + " (run repair first)"),
          node_count(n) {}
    std::size_t node_count;
};

class OracleScaleExceededError : public Error {
public:
    OracleScaleExceededError()
        : Error("OracleScaleExceeded: brute-force walk enumeration is limited to "
                "k <= 6, n <= 8") {}
};

class UnknownCategoryError : public Error {
public:
    explicit UnknownCategoryError(const std::string& value)
        : Error("UnknownCategory: value \"" + value + "\" is not in the vocabulary"),
          value(value) {}
    std::string value;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

class NonFiniteLossError : public Error {
public:
    using Error::Error;
};

class EmptyEnsembleError : public Error {
public:
    EmptyEnsembleError() : Error("EmptyEnsemble: prediction needs at least one model") {}
};

class DegenerateLabelsError : public Error {
public:
    DegenerateLabelsError()
        : Error("DegenerateLabels: ROC-AUC needs both classes present") {}
};

}  // namespace ranwalk
