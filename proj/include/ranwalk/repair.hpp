// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ranwalk/errors.hpp"
#include "ranwalk/graph.hpp"

namespace ranwalk {

enum class RepairReason { none, disconnected, two_node, single_node };

inline std::string to_string(RepairReason r) {
    switch (r) {
        case RepairReason::none: return "none";
        case RepairReason::disconnected: return "disconnected";
        case RepairReason::two_node: return "two_node";
        case RepairReason::single_node: return "single_node";
    }
    return "none";
}

inline RepairReason repair_reason_from_string(const std::string& s) {
    if (s == "none") return RepairReason::none;
    if (s == "disconnected") return RepairReason::disconnected;
    if (s == "two_node") return RepairReason::two_node;
    if (s == "single_node") return RepairReason::single_node;
    throw ParseError("unknown repair reason \"" + s + "\"");
}

// Provenance of virtual-node padding. added_nodes are always the trailing
// indices [original_node_count, new node count).
struct RepairRecord {
    std::size_t original_node_count = 0;
    std::vector<std::size_t> added_nodes;
    RepairReason reason = RepairReason::none;

    friend bool operator==(const RepairRecord&, const RepairRecord&) = default;
};

struct RepairResult {
    AttributedGraph graph;
    RepairRecord record;
};

// Make a graph connected with at least three nodes so every walk view is
// well-defined. Virtual nodes get zero feature rows and unit-weight edges;
// original nodes, edges, weights and features survive unchanged. Idempotent:
// repairing a repaired graph reports reason = none.
inline RepairResult repair(const AttributedGraph& g) {
    const std::size_t n = g.node_count();
    if (n == 0) throw EmptyGraphError();
    const std::size_t c = g.feature_dim();
    const bool connected = is_connected(g);

    if (connected && n >= 3) return {g, {n, {}, RepairReason::none}};

    if (n == 1) {
        // two extra nodes, joined to the original node and to each other
        Matrix features(3, c);
        for (std::size_t j = 0; j < c; ++j) features(0, j) = g.features()(0, j);
        std::vector<Edge> edges = g.edges();
        edges.push_back({0, 1, 1.0});
        edges.push_back({0, 2, 1.0});
        edges.push_back({1, 2, 1.0});
        return {AttributedGraph(3, std::move(edges), std::move(features)),
                {1, {1, 2}, RepairReason::single_node}};
    }

    // one extra node, joined to every original node
    const RepairReason reason =
        (connected && n == 2) ? RepairReason::two_node : RepairReason::disconnected;
    Matrix features(n + 1, c);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) features(i, j) = g.features()(i, j);
    std::vector<Edge> edges = g.edges();
    for (std::size_t i = 0; i < n; ++i) edges.push_back({i, n, 1.0});
    return {AttributedGraph(n + 1, std::move(edges), std::move(features)),
            {n, {n}, reason}};
}

}  // namespace ranwalk
