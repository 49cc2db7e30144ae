// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ranwalk/errors.hpp"
#include "ranwalk/matrix.hpp"
#include "ranwalk/repair.hpp"
#include "ranwalk/views.hpp"

namespace ranwalk {

// Feature sets a model or fingerprint can consume, in canonical
// concatenation order: raw X first, then the walk views.
enum class ViewKind { raw, walk1, walk2, walk_gamma };

inline std::string to_string(ViewKind k) {
    switch (k) {
        case ViewKind::raw: return "x";
        case ViewKind::walk1: return "x1";
        case ViewKind::walk2: return "x2";
        case ViewKind::walk_gamma: return "xg";
    }
    return "x";
}

inline ViewKind view_kind_from_name(const std::string& name) {
    if (name == "x") return ViewKind::raw;
    if (name == "x1") return ViewKind::walk1;
    if (name == "x2") return ViewKind::walk2;
    if (name == "xg" || name == "xgamma") return ViewKind::walk_gamma;
    throw ParseError("unknown view \"" + name + "\" (expected x, x1, x2 or xg)");
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace detail

// Non-empty ordered subset of {X, X1, X2, Xgamma}. Construction
// canonicalizes the order and rejects duplicates; gamma parameterizes the
// fractional view (default 0.1).
class ViewSelection {
public:
    ViewSelection() : kinds_{ViewKind::walk1}, gamma_(0.1) {}

    ViewSelection(std::vector<ViewKind> kinds, double gamma) : gamma_(gamma) {
        if (kinds.empty()) throw Error("view selection must not be empty");
        for (ViewKind k : {ViewKind::raw, ViewKind::walk1, ViewKind::walk2, ViewKind::walk_gamma}) {
            const auto count = std::count(kinds.begin(), kinds.end(), k);
            if (count > 1) throw Error("duplicate view \"" + to_string(k) + "\" in selection");
            if (count == 1) kinds_.push_back(k);
        }
        if (contains(ViewKind::walk_gamma) && !(gamma > 0.0 && gamma <= 1.0))
            throw GammaOutOfRangeError(gamma);
    }

    // "x,x1,x2,xg" in any order
    static ViewSelection parse(const std::string& comma_list, double gamma) {
        std::vector<ViewKind> kinds;
        for (const std::string& name : detail::split_csv(comma_list))
            kinds.push_back(view_kind_from_name(name));
        return ViewSelection(std::move(kinds), gamma);
    }

    const std::vector<ViewKind>& kinds() const { return kinds_; }
    double gamma() const { return gamma_; }
    std::size_t size() const { return kinds_.size(); }

    bool contains(ViewKind k) const {
        return std::find(kinds_.begin(), kinds_.end(), k) != kinds_.end();
    }

    std::string names() const {
        std::string s;
        for (ViewKind k : kinds_) {
            if (!s.empty()) s += ",";
            s += to_string(k);
        }
        return s;
    }

    friend bool operator==(const ViewSelection&, const ViewSelection&) = default;

private:
    std::vector<ViewKind> kinds_;
    double gamma_;
};

enum class PoolingOp { mean, sum, max, mean_scaled_by_max };

inline std::string to_string(PoolingOp op) {
    switch (op) {
        case PoolingOp::mean: return "mean";
        case PoolingOp::sum: return "sum";
        case PoolingOp::max: return "max";
        case PoolingOp::mean_scaled_by_max: return "mean_scaled_by_max";
    }
    return "mean";
}

inline PoolingOp pooling_from_name(const std::string& name) {
    if (name == "mean") return PoolingOp::mean;
    if (name == "sum" || name == "add") return PoolingOp::sum;
    if (name == "max") return PoolingOp::max;
    if (name == "mean_scaled_by_max" || name == "msm") return PoolingOp::mean_scaled_by_max;
    throw ParseError("unknown pooling \"" + name +
                     "\" (expected mean, sum, max or mean_scaled_by_max)");
}

// One pooling operator per selected view.
struct PoolingSpec {
    std::vector<PoolingOp> ops;

    static PoolingSpec uniform(PoolingOp op, std::size_t count) {
        return {std::vector<PoolingOp>(count, op)};
    }

    // A single name broadcasts; a comma list must match the view count.
    static PoolingSpec parse(const std::string& comma_list, std::size_t count) {
        std::vector<std::string> names = detail::split_csv(comma_list);
        if (names.empty()) throw ParseError("pooling spec is empty");
        if (names.size() == 1) return uniform(pooling_from_name(names[0]), count);
        if (names.size() != count)
            throw ParseError("pooling spec has " + std::to_string(names.size()) +
                             " operators for " + std::to_string(count) + " views");
        PoolingSpec spec;
        for (const std::string& n : names) spec.ops.push_back(pooling_from_name(n));
        return spec;
    }

    std::string names() const {
        std::string s;
        for (PoolingOp op : ops) {
            if (!s.empty()) s += ",";
            s += to_string(op);
        }
        return s;
    }

    friend bool operator==(const PoolingSpec&, const PoolingSpec&) = default;
};

// Column-wise global pooling of an n x h feature matrix down to h values.
// mean_scaled_by_max is the elementwise product of the mean and max vectors.
inline Vector pool(const Matrix& features, PoolingOp op) {
    const std::size_t n = features.rows();
    const std::size_t h = features.cols();
    if (n == 0) throw Error("pool: feature matrix has no rows");
    Vector out(h, 0.0);
    switch (op) {
        case PoolingOp::mean:
        case PoolingOp::sum:
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < h; ++j) out[j] += features(i, j);
            if (op == PoolingOp::mean)
                for (double& v : out) v /= static_cast<double>(n);
            break;
        case PoolingOp::max:
            for (std::size_t j = 0; j < h; ++j) {
                double best = features(0, j);
                for (std::size_t i = 1; i < n; ++i) best = std::max(best, features(i, j));
                out[j] = best;
            }
            break;
        case PoolingOp::mean_scaled_by_max:
            for (std::size_t j = 0; j < h; ++j) {
                double acc = 0.0;
                double best = features(0, j);
                for (std::size_t i = 0; i < n; ++i) {
                    acc += features(i, j);
                    best = std::max(best, features(i, j));
                }
                out[j] = acc / static_cast<double>(n) * best;
            }
            break;
    }
    return out;
}

// The feature matrix each selected view contributes: raw X as-is, walk views
// via their stationary-scaled features. Views must already be present in the
// set for the selected kinds.
inline std::vector<Matrix> selected_feature_matrices(const AttributedGraph& g,
                                                     const ViewSet& views,
                                                     const ViewSelection& sel) {
    std::vector<Matrix> out;
    out.reserve(sel.size());
    for (ViewKind k : sel.kinds()) {
        switch (k) {
            case ViewKind::raw:
                out.push_back(g.features());
                break;
            case ViewKind::walk1:
                if (!views.walk1) throw Error("walk1 view missing from bundle");
                out.push_back(views.walk1->scaled_features);
                break;
            case ViewKind::walk2:
                if (!views.walk2) throw Error("walk2 view missing from bundle");
                out.push_back(views.walk2->scaled_features);
                break;
            case ViewKind::walk_gamma:
                if (!views.walk_gamma) throw Error("walk_gamma view missing from bundle");
                out.push_back(views.walk_gamma->scaled_features);
                break;
        }
    }
    return out;
}

inline ViewSet build_views(const AttributedGraph& g, const ViewSelection& sel) {
    return build_views(g, sel.contains(ViewKind::walk1), sel.contains(ViewKind::walk2),
                       sel.contains(ViewKind::walk_gamma), sel.gamma());
}

// Fixed-size pooled embedding of one graph, with provenance.
struct Fingerprint {
    std::string graph_id;
    std::string views;
    std::string pooling;
    double gamma = 0.0;
    Vector values;
};

// Pool each selected view's (scaled) features and concatenate in canonical
// order. The graph must be repaired (connected, n >= 3) first.
inline Fingerprint fingerprint(const AttributedGraph& g, const ViewSelection& sel,
                               const PoolingSpec& pools, std::string graph_id = "") {
    if (pools.ops.size() != sel.size())
        throw DimensionMismatchError("pooling spec does not match view selection");
    const ViewSet views = build_views(g, sel);
    const std::vector<Matrix> mats = selected_feature_matrices(g, views, sel);
    Fingerprint fp{std::move(graph_id), sel.names(), pools.names(), sel.gamma(), {}};
    for (std::size_t v = 0; v < mats.size(); ++v) {
        const Vector pooled = pool(mats[v], pools.ops[v]);
        fp.values.insert(fp.values.end(), pooled.begin(), pooled.end());
    }
    return fp;
}

// Categorical node attributes: one column of string values per attribute,
// values.size() == node count.
struct CategoricalColumn {
    std::string name;
    std::vector<std::string> values;

    friend bool operator==(const CategoricalColumn&, const CategoricalColumn&) = default;
};

struct VocabularyColumn {
    std::string name;
    std::vector<std::string> categories;
};

// One-hot encoding: one block per vocabulary column, concatenated in
// vocabulary order; each block row sums to 1.
inline Matrix one_hot_encode(const std::vector<CategoricalColumn>& columns,
                             const std::vector<VocabularyColumn>& vocab) {
    if (vocab.empty()) throw Error("one_hot_encode: empty vocabulary");
    std::size_t n = 0;
    std::size_t width = 0;
    for (const VocabularyColumn& vc : vocab) width += vc.categories.size();
    std::vector<const CategoricalColumn*> matched;
    for (const VocabularyColumn& vc : vocab) {
        const auto it = std::find_if(columns.begin(), columns.end(),
                                     [&vc](const CategoricalColumn& c) { return c.name == vc.name; });
        if (it == columns.end())
            throw Error("one_hot_encode: attribute \"" + vc.name + "\" missing from graph");
        matched.push_back(&*it);
        if (n == 0) n = it->values.size();
        if (it->values.size() != n)
            throw DimensionMismatchError("one_hot_encode: attribute \"" + vc.name +
                                         "\" has inconsistent length");
    }
    Matrix x(n, width);
    std::size_t offset = 0;
    for (std::size_t a = 0; a < vocab.size(); ++a) {
        const std::vector<std::string>& cats = vocab[a].categories;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string& value = matched[a]->values[i];
            const auto it = std::find(cats.begin(), cats.end(), value);
            if (it == cats.end()) throw UnknownCategoryError(value);
            x(i, offset + static_cast<std::size_t>(it - cats.begin())) = 1.0;
        }
        offset += cats.size();
    }
    return x;
}

}  // namespace ranwalk
