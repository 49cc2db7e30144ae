// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ranwalk/errors.hpp"
#include "ranwalk/features.hpp"
#include "ranwalk/graph.hpp"
#include "ranwalk/model.hpp"
#include "ranwalk/repair.hpp"
#include "ranwalk/views.hpp"

namespace ranwalk {

enum class Split { train, valid, test };

inline std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::valid: return "valid";
        case Split::test: return "test";
    }
    return "train";
}

inline Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "valid" || s == "validation") return Split::valid;
    if (s == "test") return Split::test;
    throw ParseError("unknown split \"" + s + "\"");
}

struct ManifestRecord {
    std::string id;
    AttributedGraph graph;
    Vector labels;
    std::vector<std::uint8_t> label_mask;  // 1 = label present
    Split split = Split::train;
};

// External split assignments are honored verbatim; this module never
// generates or reshuffles splits.
struct DatasetManifest {
    std::vector<ManifestRecord> records;
    std::size_t label_dim = 0;
};

inline void validate_manifest(const DatasetManifest& manifest) {
    std::map<std::string, std::size_t> seen;
    for (const ManifestRecord& r : manifest.records) {
        if (r.id.empty()) throw Error("manifest record has an empty id");
        if (++seen[r.id] > 1) throw Error("duplicate graph id \"" + r.id + "\" in manifest");
        if (r.labels.size() != manifest.label_dim || r.label_mask.size() != manifest.label_dim)
            throw DimensionMismatchError("record \"" + r.id + "\" has label arity " +
                                         std::to_string(r.labels.size()) + ", manifest declares " +
                                         std::to_string(manifest.label_dim));
    }
}

struct ProcessedGraph {
    std::string id;
    AttributedGraph graph;  // repaired
    RepairRecord repair;
    ViewSet views;
};

struct ProcessingError {
    std::string id;
    std::string message;
};

struct ProcessedStore {
    std::vector<ProcessedGraph> bundles;  // input order, failed graphs skipped
    std::vector<ProcessingError> errors;  // input order
};

namespace detail {

// Strided static partition: workers own disjoint index sets and write to
// preallocated slots, so results are independent of scheduling.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min({count, hw, std::size_t{8}});
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&fn, w, workers, count] {
            for (std::size_t i = w; i < count; i += workers) fn(i);
        });
    for (std::thread& t : pool) t.join();
}

}  // namespace detail

// Validate, repair and expand one graph to the selected walk views.
inline ProcessedGraph process_graph(const AttributedGraph& g, std::string id,
                                    const ViewSelection& sel) {
    const ValidationReport report = validate_graph(g);
    if (!report.ok()) throw Error("invalid graph: " + report.summary());
    RepairResult repaired = repair(g);
    ViewSet views = build_views(repaired.graph, sel);
    return {std::move(id), std::move(repaired.graph), std::move(repaired.record),
            std::move(views)};
}

// Repair + view expansion for a whole manifest. Per-graph failures are
// collected with their ids and do not abort the run.
inline ProcessedStore process_dataset(const DatasetManifest& manifest, const ViewSelection& sel) {
    validate_manifest(manifest);
    const std::size_t count = manifest.records.size();
    std::vector<std::optional<ProcessedGraph>> slots(count);
    std::vector<std::optional<ProcessingError>> error_slots(count);
    detail::parallel_for(count, [&](std::size_t i) {
        const ManifestRecord& r = manifest.records[i];
        try {
            slots[i] = process_graph(r.graph, r.id, sel);
        } catch (const std::exception& e) {
            error_slots[i] = ProcessingError{r.id, e.what()};
        }
    });
    ProcessedStore store;
    for (std::size_t i = 0; i < count; ++i) {
        if (slots[i]) store.bundles.push_back(std::move(*slots[i]));
        if (error_slots[i]) store.errors.push_back(std::move(*error_slots[i]));
    }
    return store;
}

struct RunRecord {
    std::uint64_t seed = 0;
    std::vector<EpochMetrics> history;
    EvalMetrics final_valid;
    EvalMetrics final_test;
    double wall_time_seconds = 0.0;
    std::string error;  // empty on success

    bool ok() const { return error.empty(); }
};

struct ExperimentResult {
    std::vector<RunRecord> runs;       // seed order
    std::vector<ShallowModel> models;  // successful seeds, ascending seed order
    std::size_t succeeded = 0;
    // metrics of the ensemble-averaged predictions over successful seeds
    EvalMetrics ensemble_valid;
    EvalMetrics ensemble_test;
    // per-seed final metrics summarized over successful seeds
    EvalMetrics seed_mean_valid, seed_std_valid;
    EvalMetrics seed_mean_test, seed_std_test;
};

namespace detail {

struct SplitSamples {
    std::vector<LabeledGraph> train, valid, test;
};

inline SplitSamples assemble_samples(const ProcessedStore& store, const DatasetManifest& manifest,
                                     const ViewSelection& sel) {
    std::map<std::string, const ManifestRecord*> by_id;
    for (const ManifestRecord& r : manifest.records) by_id[r.id] = &r;
    SplitSamples out;
    std::size_t feature_dim = 0;
    for (const ProcessedGraph& b : store.bundles) {
        const auto it = by_id.find(b.id);
        if (it == by_id.end()) throw Error("bundle id \"" + b.id + "\" not in manifest");
        const ManifestRecord& r = *it->second;
        if (feature_dim == 0) feature_dim = b.graph.feature_dim();
        if (b.graph.feature_dim() != feature_dim)
            throw DimensionMismatchError("graph \"" + b.id + "\" has feature dim " +
                                         std::to_string(b.graph.feature_dim()) +
                                         ", dataset uses " + std::to_string(feature_dim));
        LabeledGraph sample{model_input(b.graph, b.views, sel), r.labels, r.label_mask};
        switch (r.split) {
            case Split::train: out.train.push_back(std::move(sample)); break;
            case Split::valid: out.valid.push_back(std::move(sample)); break;
            case Split::test: out.test.push_back(std::move(sample)); break;
        }
    }
    return out;
}

inline void summarize(const std::vector<double>& values, double& mean_out, double& std_out) {
    std::vector<double> finite;
    for (double v : values)
        if (std::isfinite(v)) finite.push_back(v);
    if (finite.empty()) {
        mean_out = std::numeric_limits<double>::quiet_NaN();
        std_out = std::numeric_limits<double>::quiet_NaN();
        return;
    }
    double mean = 0.0;
    for (double v : finite) mean += v;
    mean /= static_cast<double>(finite.size());
    double var = 0.0;
    for (double v : finite) var += (v - mean) * (v - mean);
    var /= static_cast<double>(finite.size());
    mean_out = mean;
    std_out = std::sqrt(var);
}

inline void summarize_metrics(const std::vector<EvalMetrics>& per_seed, EvalMetrics& mean,
                              EvalMetrics& stddev) {
    std::vector<double> col;
    auto grab = [&per_seed, &col](double EvalMetrics::*field) {
        col.clear();
        for (const EvalMetrics& m : per_seed) col.push_back(m.*field);
        return &col;
    };
    summarize(*grab(&EvalMetrics::mae), mean.mae, stddev.mae);
    summarize(*grab(&EvalMetrics::rmse), mean.rmse, stddev.rmse);
    summarize(*grab(&EvalMetrics::r2), mean.r2, stddev.r2);
    summarize(*grab(&EvalMetrics::roc_auc), mean.roc_auc, stddev.roc_auc);
}

}  // namespace detail

// Multi-seed training with ensemble-averaged prediction metrics. Seeds run
// independently (possibly in parallel); a failed seed is reported in its
// RunRecord and does not abort sibling seeds, and ensemble metrics are
// computed over the successful seeds only.
inline ExperimentResult run_experiment(const ProcessedStore& store,
                                       const DatasetManifest& manifest, const ModelConfig& base_cfg,
                                       const TrainConfig& tcfg, std::size_t n_seeds) {
    if (n_seeds == 0) throw Error("run_experiment: n_seeds must be >= 1");
    const detail::SplitSamples samples =
        detail::assemble_samples(store, manifest, base_cfg.selection);
    if (samples.train.empty()) throw Error("run_experiment: no training graphs");

    ModelConfig cfg = base_cfg;
    const std::size_t data_dim = samples.train.front().input.features.front().cols();
    if (cfg.input_dim == 0)
        cfg.input_dim = data_dim;
    else if (cfg.input_dim != data_dim)
        throw DimensionMismatchError("config input_dim " + std::to_string(cfg.input_dim) +
                                     " does not match data feature dim " +
                                     std::to_string(data_dim));
    if (cfg.output_dim == 0) cfg.output_dim = manifest.label_dim;
    if (cfg.output_dim != manifest.label_dim)
        throw DimensionMismatchError("config output_dim " + std::to_string(cfg.output_dim) +
                                     " does not match label arity " +
                                     std::to_string(manifest.label_dim));

    ExperimentResult result;
    result.runs.resize(n_seeds);
    std::vector<std::optional<ShallowModel>> models(n_seeds);
    detail::parallel_for(n_seeds, [&](std::size_t k) {
        RunRecord& run = result.runs[k];
        run.seed = tcfg.seed + k;
        TrainConfig seed_cfg = tcfg;
        seed_cfg.seed = run.seed;
        const auto start = std::chrono::steady_clock::now();
        try {
            TrainResult trained = train(samples.train, samples.valid, cfg, seed_cfg);
            run.history = std::move(trained.history);
            const std::span<const ShallowModel> one(&trained.model, 1);
            if (!samples.valid.empty()) run.final_valid = evaluate(one, samples.valid, cfg.task);
            if (!samples.test.empty()) run.final_test = evaluate(one, samples.test, cfg.task);
            models[k] = std::move(trained.model);
        } catch (const std::exception& e) {
            run.error = e.what();
        }
        run.wall_time_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    });

    std::vector<EvalMetrics> valid_metrics, test_metrics;
    for (std::size_t k = 0; k < n_seeds; ++k) {
        if (!models[k]) continue;
        result.models.push_back(std::move(*models[k]));
        valid_metrics.push_back(result.runs[k].final_valid);
        test_metrics.push_back(result.runs[k].final_test);
    }
    result.succeeded = result.models.size();
    if (!result.models.empty()) {
        try {
            if (!samples.valid.empty())
                result.ensemble_valid = evaluate(result.models, samples.valid, cfg.task);
            if (!samples.test.empty())
                result.ensemble_test = evaluate(result.models, samples.test, cfg.task);
        } catch (const DegenerateLabelsError&) {
            // single-class split: ensemble AUC stays NaN
        }
        detail::summarize_metrics(valid_metrics, result.seed_mean_valid, result.seed_std_valid);
        detail::summarize_metrics(test_metrics, result.seed_mean_test, result.seed_std_test);
    }
    return result;
}

}  // namespace ranwalk
