// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ranwalk/errors.hpp"
#include "ranwalk/matrix.hpp"

namespace ranwalk {

// Dense-representation guard; molecular graphs are tens of nodes.
inline constexpr std::size_t kMaxNodeCount = 4096;

struct Edge {
    std::size_t i = 0;
    std::size_t j = 0;
    double weight = 1.0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected weighted graph with a per-node feature matrix. Immutable after
// construction. Edges are canonicalized (i < j, sorted) so graphs that differ
// only in edge-list order compare equal; zero-weight edges are equivalent to
// absent edges and are not stored.
class AttributedGraph {
public:
    AttributedGraph() = default;

    AttributedGraph(std::size_t node_count, std::vector<Edge> edges, Matrix features)
        : node_count_(node_count), edges_(std::move(edges)), features_(std::move(features)) {
        if (node_count_ > kMaxNodeCount) throw GraphTooLargeError(node_count_);
        for (Edge& e : edges_)
            if (e.j < e.i) std::swap(e.i, e.j);
        std::erase_if(edges_, [](const Edge& e) { return e.weight == 0.0; });
        std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
            return std::tie(a.i, a.j, a.weight) < std::tie(b.i, b.j, b.weight);
        });
    }

    std::size_t node_count() const { return node_count_; }
    const std::vector<Edge>& edges() const { return edges_; }
    const Matrix& features() const { return features_; }
    std::size_t feature_dim() const { return features_.cols(); }

    // Dense symmetric weighted adjacency with zero diagonal (for valid input).
    Matrix adjacency() const {
        Matrix a(node_count_, node_count_);
        for (const Edge& e : edges_) {
            a(e.i, e.j) += e.weight;
            a(e.j, e.i) += e.weight;
        }
        return a;
    }

    friend bool operator==(const AttributedGraph&, const AttributedGraph&) = default;

private:
    std::size_t node_count_ = 0;
    std::vector<Edge> edges_;
    Matrix features_;
};

enum class Violation {
    empty_graph,
    self_loop,
    negative_weight,
    nonfinite_weight,
    duplicate_edge,
    endpoint_out_of_range,
    feature_row_mismatch,
    nonfinite_feature,
};

inline std::string to_string(Violation v) {
    switch (v) {
        case Violation::empty_graph: return "empty_graph";
        case Violation::self_loop: return "self_loop";
        case Violation::negative_weight: return "negative_weight";
        case Violation::nonfinite_weight: return "nonfinite_weight";
        case Violation::duplicate_edge: return "duplicate_edge";
        case Violation::endpoint_out_of_range: return "endpoint_out_of_range";
        case Violation::feature_row_mismatch: return "feature_row_mismatch";
        case Violation::nonfinite_feature: return "nonfinite_feature";
    }
    return "unknown";
}

struct ValidationIssue {
    Violation kind;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const { return issues.empty(); }
    bool has(Violation v) const {
        return std::any_of(issues.begin(), issues.end(),
                           [v](const ValidationIssue& x) { return x.kind == v; });
    }
    std::string summary() const {
        std::string s;
        for (const ValidationIssue& x : issues) {
            if (!s.empty()) s += "; ";
            s += to_string(x.kind) + ": " + x.detail;
        }
        return s;
    }
};

// Report-style check of every AttributedGraph invariant. An empty report
// means the graph is safe for all downstream operations.
inline ValidationReport validate_graph(const AttributedGraph& g) {
    ValidationReport report;
    const std::size_t n = g.node_count();
    if (n == 0) report.issues.push_back({Violation::empty_graph, "node count is zero"});
    if (g.features().rows() != n)
        report.issues.push_back({Violation::feature_row_mismatch,
                                 "feature matrix has " + std::to_string(g.features().rows()) +
                                     " rows for " + std::to_string(n) + " nodes"});
    for (double x : g.features().values())
        if (!std::isfinite(x)) {
            report.issues.push_back({Violation::nonfinite_feature, "feature entry is not finite"});
            break;
        }
    const Edge* prev = nullptr;
    for (const Edge& e : g.edges()) {
        const std::string name =
            "(" + std::to_string(e.i) + ", " + std::to_string(e.j) + ")";
        if (e.i == e.j) report.issues.push_back({Violation::self_loop, "edge " + name});
        if (e.i >= n || e.j >= n)
            report.issues.push_back({Violation::endpoint_out_of_range, "edge " + name});
        if (!std::isfinite(e.weight))
            report.issues.push_back({Violation::nonfinite_weight, "edge " + name});
        else if (e.weight < 0.0)
            report.issues.push_back({Violation::negative_weight, "edge " + name});
        if (prev != nullptr && prev->i == e.i && prev->j == e.j)
            report.issues.push_back({Violation::duplicate_edge, "edge " + name});
        prev = &e;
    }
    return report;
}

// Weighted degrees d_i = sum of incident edge weights.
inline Vector degrees(const AttributedGraph& g) {
    Vector d(g.node_count(), 0.0);
    for (const Edge& e : g.edges()) {
        d[e.i] += e.weight;
        d[e.j] += e.weight;
    }
    return d;
}

// L = D - A, symmetric with zero row sums.
inline Matrix laplacian(const AttributedGraph& g) {
    Matrix l(g.node_count(), g.node_count());
    for (const Edge& e : g.edges()) {
        l(e.i, e.j) -= e.weight;
        l(e.j, e.i) -= e.weight;
        l(e.i, e.i) += e.weight;
        l(e.j, e.j) += e.weight;
    }
    return l;
}

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n), size_(n, 1) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        std::size_t root = x;
        while (parent_[root] != root) root = parent_[root];
        while (parent_[x] != root) {
            std::size_t next = parent_[x];
            parent_[x] = root;
            x = next;
        }
        return root;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
    }

private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
};

// Partition of the node indices into connected components, each sorted,
// ordered by smallest member. Invariant to edge-list order.
inline std::vector<std::vector<std::size_t>> connected_components(const AttributedGraph& g) {
    const std::size_t n = g.node_count();
    UnionFind uf(n);
    for (const Edge& e : g.edges())
        if (e.i < n && e.j < n) uf.unite(e.i, e.j);
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::ptrdiff_t> slot(n, -1);
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t root = uf.find(v);
        if (slot[root] < 0) {
            slot[root] = static_cast<std::ptrdiff_t>(groups.size());
            groups.emplace_back();
        }
        groups[static_cast<std::size_t>(slot[root])].push_back(v);
    }
    return groups;
}

inline bool is_connected(const AttributedGraph& g) {
    return g.node_count() > 0 && connected_components(g).size() == 1;
}

}  // namespace ranwalk
