// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ranwalk/errors.hpp"
#include "ranwalk/features.hpp"
#include "ranwalk/graph.hpp"
#include "ranwalk/model.hpp"
#include "ranwalk/pipeline.hpp"
#include "ranwalk/repair.hpp"
#include "ranwalk/views.hpp"

namespace ranwalk {

using json = nlohmann::json;

// Shortest round-trip decimal representation.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Outputs land via temp-file-then-rename so readers never see partial files.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

namespace detail {

inline json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array of rows");
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    if (rows > 0) {
        if (!j[0].is_array()) throw ParseError(what + " rows must be arrays");
        cols = j[0].size();
    }
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (!j[i].is_array() || j[i].size() != cols)
            throw ParseError(what + " has ragged rows");
        for (std::size_t c = 0; c < cols; ++c) {
            if (!j[i][c].is_number()) throw ParseError(what + " entries must be numbers");
            m(i, c) = j[i][c].get<double>();
        }
    }
    return m;
}

inline json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (double x : v) arr.push_back(x);
    return arr;
}

inline Vector vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array");
    Vector v;
    v.reserve(j.size());
    for (const json& x : j) {
        if (!x.is_number()) throw ParseError(what + " entries must be numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

inline double number_or_nan(const json& j) {
    return j.is_number() ? j.get<double>() : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// GraphDocument
//
//   {"id": "p3", "n": 3, "edges": [[0, 1], [1, 2, 1.0]],
//    "features": [[1.0], [1.0], [1.0]],
//    "categorical": {"element": ["C", "N", "O"]}}
//
// Node indices are 0-based. Edge weight defaults to 1.0 and endpoints are
// accepted in either order.
// ---------------------------------------------------------------------------

struct GraphDocument {
    std::string id;
    std::size_t n = 0;
    std::vector<Edge> edges;
    Matrix features;  // 0 x 0 when only categorical attributes are given
    std::vector<CategoricalColumn> categorical;
};

inline GraphDocument parse_graph_document(const json& doc) {
    if (!doc.is_object()) throw ParseError("graph document must be a JSON object");
    GraphDocument g;
    if (doc.contains("id")) {
        if (!doc["id"].is_string()) throw ParseError("graph id must be a string");
        g.id = doc["id"].get<std::string>();
    }
    if (!doc.contains("n") || !doc["n"].is_number_unsigned())
        throw ParseError("graph document needs an unsigned \"n\"");
    g.n = doc["n"].get<std::size_t>();
    if (doc.contains("edges")) {
        if (!doc["edges"].is_array()) throw ParseError("\"edges\" must be an array");
        for (const json& e : doc["edges"]) {
            if (!e.is_array() || e.size() < 2 || e.size() > 3)
                throw ParseError("each edge must be [i, j] or [i, j, w]");
            if (!e[0].is_number_unsigned() || !e[1].is_number_unsigned())
                throw ParseError("edge endpoints must be unsigned integers");
            Edge edge{e[0].get<std::size_t>(), e[1].get<std::size_t>(), 1.0};
            if (e.size() == 3) {
                if (!e[2].is_number()) throw ParseError("edge weight must be a number");
                edge.weight = e[2].get<double>();
            }
            g.edges.push_back(edge);
        }
    }
    if (doc.contains("features"))
        g.features = detail::matrix_from_json(doc["features"], "\"features\"");
    if (doc.contains("categorical")) {
        if (!doc["categorical"].is_object()) throw ParseError("\"categorical\" must be an object");
        for (const auto& [name, values] : doc["categorical"].items()) {
            if (!values.is_array()) throw ParseError("categorical attribute must be an array");
            CategoricalColumn col{name, {}};
            for (const json& v : values) {
                if (!v.is_string()) throw ParseError("categorical values must be strings");
                col.values.push_back(v.get<std::string>());
            }
            g.categorical.push_back(std::move(col));
        }
    }
    if (doc.contains("features") && g.features.rows() != g.n)
        throw ParseError("\"features\" has " + std::to_string(g.features.rows()) +
                         " rows for n = " + std::to_string(g.n));
    if (!doc.contains("features") && g.categorical.empty())
        throw ParseError("graph document needs \"features\" or \"categorical\"");
    return g;
}

inline json to_json(const GraphDocument& g) {
    json doc;
    doc["id"] = g.id;
    doc["n"] = g.n;
    json edges = json::array();
    for (const Edge& e : g.edges) edges.push_back(json::array({e.i, e.j, e.weight}));
    doc["edges"] = std::move(edges);
    if (!g.features.empty() || g.categorical.empty())
        doc["features"] = detail::matrix_to_json(g.features);
    if (!g.categorical.empty()) {
        json cat = json::object();
        for (const CategoricalColumn& col : g.categorical) cat[col.name] = col.values;
        doc["categorical"] = cat;
    }
    return doc;
}

inline GraphDocument graph_document(const std::string& id, const AttributedGraph& g) {
    return {id, g.node_count(), g.edges(), g.features(), {}};
}

// Build the graph held by a document. Documents carrying only categorical
// attributes need a vocabulary (derived over the whole dataset by the
// manifest loader).
inline AttributedGraph build_graph(const GraphDocument& doc,
                                   const std::vector<VocabularyColumn>& vocab = {}) {
    Matrix features = doc.features;
    if (features.empty() && !doc.categorical.empty()) {
        if (vocab.empty()) throw Error("graph \"" + doc.id + "\" needs a one-hot vocabulary");
        features = one_hot_encode(doc.categorical, vocab);
    }
    return AttributedGraph(doc.n, doc.edges, std::move(features));
}

inline GraphDocument load_graph_file(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    GraphDocument g = parse_graph_document(doc);
    if (g.id.empty()) g.id = path.stem().string();
    return g;
}

// ---------------------------------------------------------------------------
// Manifest (JSON lines)
//
//   {"graph": "graphs/p3.json", "label": [1.5], "split": "train"}
//   {"graph": {...inline...}, "label": [null, 2.0], "split": "valid"}
//
// Graph paths are resolved relative to the manifest file. A line-level "id"
// overrides the document id.
// ---------------------------------------------------------------------------

struct LoadedManifest {
    DatasetManifest manifest;
    std::vector<ProcessingError> errors;  // per-record load failures
};

namespace detail {

// Dataset-level vocabulary for documents that carry only categorical
// attributes: attribute names and category values sorted ascending.
inline std::vector<VocabularyColumn> dataset_vocabulary(const std::vector<GraphDocument>& docs) {
    std::map<std::string, std::set<std::string>> seen;
    for (const GraphDocument& d : docs) {
        if (!d.features.empty()) continue;
        for (const CategoricalColumn& col : d.categorical)
            seen[col.name].insert(col.values.begin(), col.values.end());
    }
    std::vector<VocabularyColumn> vocab;
    for (const auto& [name, cats] : seen)
        vocab.push_back({name, {cats.begin(), cats.end()}});
    return vocab;
}

}  // namespace detail

inline LoadedManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open manifest " + path.string());
    const std::filesystem::path base = path.parent_path();

    struct PendingRecord {
        std::string id;
        GraphDocument doc;
        Vector labels;
        std::vector<std::uint8_t> mask;
        Split split;
    };
    LoadedManifest out;
    std::vector<PendingRecord> pending;
    std::vector<GraphDocument> docs_for_vocab;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = path.filename().string() + ":" + std::to_string(line_no);
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(where + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("graph") || !rec.contains("label") ||
            !rec.contains("split"))
            throw ParseError(where + ": record needs \"graph\", \"label\" and \"split\"");

        PendingRecord p;
        p.split = split_from_string(rec["split"].get<std::string>());
        if (!rec["label"].is_array()) throw ParseError(where + ": \"label\" must be an array");
        for (const json& v : rec["label"]) {
            if (v.is_null()) {
                p.labels.push_back(0.0);
                p.mask.push_back(0);
            } else if (v.is_number()) {
                p.labels.push_back(v.get<double>());
                p.mask.push_back(1);
            } else {
                throw ParseError(where + ": labels must be numbers or null");
            }
        }
        std::string fallback_id;
        try {
            if (rec["graph"].is_string()) {
                const std::filesystem::path gp = base / rec["graph"].get<std::string>();
                fallback_id = gp.stem().string();
                p.doc = load_graph_file(gp);
            } else {
                p.doc = parse_graph_document(rec["graph"]);
            }
            p.id = rec.contains("id") ? rec["id"].get<std::string>() : p.doc.id;
            if (p.id.empty()) p.id = "line" + std::to_string(line_no);
            pending.push_back(std::move(p));
            docs_for_vocab.push_back(pending.back().doc);
        } catch (const std::exception& e) {
            std::string id = rec.contains("id") && rec["id"].is_string()
                                 ? rec["id"].get<std::string>()
                                 : fallback_id;
            if (id.empty()) id = "line" + std::to_string(line_no);
            out.errors.push_back({id, e.what()});
        }
    }

    const std::vector<VocabularyColumn> vocab = detail::dataset_vocabulary(docs_for_vocab);
    for (PendingRecord& p : pending) {
        try {
            AttributedGraph g = build_graph(p.doc, vocab);
            out.manifest.records.push_back(
                {std::move(p.id), std::move(g), std::move(p.labels), std::move(p.mask), p.split});
        } catch (const std::exception& e) {
            out.errors.push_back({p.id, e.what()});
        }
    }
    if (!out.manifest.records.empty())
        out.manifest.label_dim = out.manifest.records.front().labels.size();
    validate_manifest(out.manifest);
    return out;
}

// ---------------------------------------------------------------------------
// Processed bundle
// ---------------------------------------------------------------------------

namespace detail {

inline json walk_view_to_json(const WalkView& v) {
    json j;
    j["adjacency"] = matrix_to_json(v.adjacency);
    j["stationary"] = vector_to_json(v.stationary);
    j["scaled_features"] = matrix_to_json(v.scaled_features);
    return j;
}

inline WalkView walk_view_from_json(const json& j, WalkKind kind, double gamma) {
    WalkView v;
    v.kind = kind;
    v.gamma = kind == WalkKind::walk_gamma ? gamma : 0.0;
    v.adjacency = matrix_from_json(j.at("adjacency"), "view adjacency");
    v.stationary = vector_from_json(j.at("stationary"), "view stationary");
    v.scaled_features = matrix_from_json(j.at("scaled_features"), "view scaled_features");
    return v;
}

}  // namespace detail

inline json bundle_to_json(const ProcessedGraph& bundle, double gamma) {
    json doc;
    doc["id"] = bundle.id;
    doc["n"] = bundle.graph.node_count();
    doc["gamma"] = gamma;
    json edges = json::array();
    for (const Edge& e : bundle.graph.edges()) edges.push_back(json::array({e.i, e.j, e.weight}));
    doc["edges"] = std::move(edges);
    doc["features"] = detail::matrix_to_json(bundle.graph.features());
    doc["repair"] = {{"original_node_count", bundle.repair.original_node_count},
                     {"added_nodes", bundle.repair.added_nodes},
                     {"reason", to_string(bundle.repair.reason)}};
    json views = json::object();
    if (bundle.views.walk1) views["walk1"] = detail::walk_view_to_json(*bundle.views.walk1);
    if (bundle.views.walk2) views["walk2"] = detail::walk_view_to_json(*bundle.views.walk2);
    if (bundle.views.walk_gamma)
        views["walk_gamma"] = detail::walk_view_to_json(*bundle.views.walk_gamma);
    doc["views"] = std::move(views);
    return doc;
}

struct BundleDocument {
    std::string id;
    std::size_t n = 0;
    double gamma = 0.0;
    RepairRecord repair;
    std::vector<Edge> edges;
    Matrix features;
    ViewSet views;
};

inline BundleDocument parse_bundle(const json& doc) {
    try {
        BundleDocument b;
        b.id = doc.at("id").get<std::string>();
        b.n = doc.at("n").get<std::size_t>();
        b.gamma = doc.at("gamma").get<double>();
        const json& rep = doc.at("repair");
        b.repair.original_node_count = rep.at("original_node_count").get<std::size_t>();
        b.repair.added_nodes = rep.at("added_nodes").get<std::vector<std::size_t>>();
        b.repair.reason = repair_reason_from_string(rep.at("reason").get<std::string>());
        for (const json& e : doc.at("edges"))
            b.edges.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(),
                               e.at(2).get<double>()});
        b.features = detail::matrix_from_json(doc.at("features"), "bundle features");
        const json& views = doc.at("views");
        if (views.contains("walk1"))
            b.views.walk1 = detail::walk_view_from_json(views["walk1"], WalkKind::walk1, b.gamma);
        if (views.contains("walk2"))
            b.views.walk2 = detail::walk_view_from_json(views["walk2"], WalkKind::walk2, b.gamma);
        if (views.contains("walk_gamma"))
            b.views.walk_gamma =
                detail::walk_view_from_json(views["walk_gamma"], WalkKind::walk_gamma, b.gamma);
        return b;
    } catch (const json::exception& e) {
        throw ParseError(std::string("bundle document: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Model / experiment configuration
// ---------------------------------------------------------------------------

inline json model_config_to_json(const ModelConfig& cfg) {
    json j;
    j["views"] = cfg.selection.names();
    j["gamma"] = cfg.selection.gamma();
    j["pooling"] = cfg.pooling.names();
    j["input_dim"] = cfg.input_dim;
    j["hidden_dim"] = cfg.hidden_dim;
    j["num_tasks"] = cfg.output_dim;
    j["activation"] = to_string(cfg.activation);
    j["graphnorm"] = cfg.graphnorm;
    j["task"] = to_string(cfg.task);
    return j;
}

inline ModelConfig model_config_from_json(const json& j) {
    try {
        ModelConfig cfg;
        const double gamma = j.value("gamma", 0.1);
        cfg.selection = ViewSelection::parse(j.value("views", std::string("x1,x2,xg")), gamma);
        cfg.pooling = PoolingSpec::parse(j.value("pooling", std::string("mean")),
                                         cfg.selection.size());
        cfg.input_dim = j.value("input_dim", std::size_t{0});
        cfg.hidden_dim = j.value("hidden_dim", std::size_t{16});
        cfg.output_dim = j.value("num_tasks", std::size_t{0});
        cfg.activation = activation_from_string(j.value("activation", std::string("relu")));
        cfg.graphnorm = j.value("graphnorm", true);
        cfg.task = task_from_string(j.value("task", std::string("regression")));
        return cfg;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model config: ") + e.what());
    }
}

inline json train_config_to_json(const TrainConfig& cfg) {
    json j;
    j["optimizer"] = to_string(cfg.optimizer);
    j["learning_rate"] = cfg.learning_rate;
    j["weight_decay"] = cfg.weight_decay;
    j["epochs"] = cfg.epochs;
    j["batch_size"] = cfg.batch_size;
    j["seed"] = cfg.seed;
    j["loss"] = to_string(cfg.loss);
    j["scheduler"] = to_string(cfg.scheduler);
    j["step_size"] = cfg.step_size;
    j["step_gamma"] = cfg.step_gamma;
    j["plateau_factor"] = cfg.plateau_factor;
    j["plateau_patience"] = cfg.plateau_patience;
    return j;
}

inline TrainConfig train_config_from_json(const json& j) {
    try {
        TrainConfig cfg;
        cfg.optimizer = optimizer_from_string(j.value("optimizer", std::string("adam")));
        cfg.learning_rate = j.value("learning_rate", 0.01);
        cfg.weight_decay = j.value("weight_decay", kDefaultWeightDecay);
        cfg.epochs = j.value("epochs", std::size_t{100});
        cfg.batch_size = j.value("batch_size", std::size_t{32});
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.loss = loss_from_string(j.value("loss", std::string("mse")));
        cfg.scheduler = scheduler_from_string(j.value("scheduler", std::string("none")));
        cfg.step_size = j.value("step_size", std::size_t{50});
        cfg.step_gamma = j.value("step_gamma", 0.5);
        cfg.plateau_factor = j.value("plateau_factor", 0.1);
        cfg.plateau_patience = j.value("plateau_patience", std::size_t{10});
        return cfg;
    } catch (const json::exception& e) {
        throw ParseError(std::string("train config: ") + e.what());
    }
}

struct ExperimentConfig {
    ModelConfig model;
    TrainConfig train;
};

inline ExperimentConfig parse_experiment_config(const json& j) {
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    ExperimentConfig cfg;
    cfg.model = model_config_from_json(j.value("model", json::object()));
    cfg.train = train_config_from_json(j.value("train", json::object()));
    return cfg;
}

inline json to_json(const ExperimentConfig& cfg) {
    return json{{"model", model_config_to_json(cfg.model)},
                {"train", train_config_to_json(cfg.train)}};
}

// ---------------------------------------------------------------------------
// Checkpoints: versioned document with config, seed, and parameter tensors in
// row-major order.
// ---------------------------------------------------------------------------

inline constexpr const char* kCheckpointFormat = "ranwalk-checkpoint-v1";

struct Checkpoint {
    ShallowModel model;
    TrainConfig train;
    std::uint64_t seed = 0;
};

inline json checkpoint_to_json(const ShallowModel& model, const TrainConfig& train,
                               std::uint64_t seed) {
    json j;
    j["format"] = kCheckpointFormat;
    j["model"] = model_config_to_json(model.config);
    j["train"] = train_config_to_json(train);
    j["seed"] = seed;
    json params;
    params["embed_weight"] = model.embed_weight.values();
    params["embed_bias"] = model.embed_bias;
    json norms = json::array();
    for (const GraphNormParams& p : model.norms)
        norms.push_back(json{{"alpha", p.alpha}, {"scale", p.scale}, {"shift", p.shift}});
    params["norms"] = std::move(norms);
    params["head_weight"] = model.head_weight.values();
    params["head_bias"] = model.head_bias;
    j["params"] = std::move(params);
    return j;
}

inline Checkpoint checkpoint_from_json(const json& j) {
    try {
        if (j.value("format", std::string()) != kCheckpointFormat)
            throw ParseError("unsupported checkpoint format");
        Checkpoint ck;
        ck.model.config = model_config_from_json(j.at("model"));
        ck.train = train_config_from_json(j.at("train"));
        ck.seed = j.at("seed").get<std::uint64_t>();
        const ModelConfig& cfg = ck.model.config;
        if (cfg.input_dim == 0 || cfg.output_dim == 0)
            throw DimensionMismatchError("checkpoint config has unresolved dimensions");
        const json& params = j.at("params");
        auto take = [](const json& arr, std::size_t expected, const std::string& what) {
            Vector v = detail::vector_from_json(arr, what);
            if (v.size() != expected)
                throw DimensionMismatchError(what + " has " + std::to_string(v.size()) +
                                             " values, expected " + std::to_string(expected));
            return v;
        };
        ck.model.embed_weight = Matrix(cfg.hidden_dim, cfg.input_dim);
        ck.model.embed_weight.values() =
            take(params.at("embed_weight"), cfg.hidden_dim * cfg.input_dim, "embed_weight");
        ck.model.embed_bias = take(params.at("embed_bias"), cfg.hidden_dim, "embed_bias");
        const json& norms = params.at("norms");
        if (!norms.is_array() || norms.size() != cfg.selection.size())
            throw DimensionMismatchError("checkpoint norms count does not match view selection");
        for (const json& p : norms)
            ck.model.norms.push_back({take(p.at("alpha"), cfg.hidden_dim, "norm alpha"),
                                      take(p.at("scale"), cfg.hidden_dim, "norm scale"),
                                      take(p.at("shift"), cfg.hidden_dim, "norm shift")});
        ck.model.head_weight = Matrix(cfg.output_dim, cfg.concat_dim());
        ck.model.head_weight.values() =
            take(params.at("head_weight"), cfg.output_dim * cfg.concat_dim(), "head_weight");
        ck.model.head_bias = take(params.at("head_bias"), cfg.output_dim, "head_bias");
        return ck;
    } catch (const json::exception& e) {
        throw ParseError(std::string("checkpoint document: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Run records and metric tables
// ---------------------------------------------------------------------------

inline json eval_metrics_to_json(const EvalMetrics& m) {
    auto put = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    return json{{"mae", put(m.mae)}, {"rmse", put(m.rmse)}, {"r2", put(m.r2)},
                {"roc_auc", put(m.roc_auc)}};
}

inline EvalMetrics eval_metrics_from_json(const json& j) {
    EvalMetrics m;
    m.mae = detail::number_or_nan(j.value("mae", json(nullptr)));
    m.rmse = detail::number_or_nan(j.value("rmse", json(nullptr)));
    m.r2 = detail::number_or_nan(j.value("r2", json(nullptr)));
    m.roc_auc = detail::number_or_nan(j.value("roc_auc", json(nullptr)));
    return m;
}

inline json experiment_to_json(const ExperimentResult& result, const ExperimentConfig& cfg,
                               std::size_t n_seeds) {
    json j;
    j["config"] = to_json(cfg);
    j["n_seeds"] = n_seeds;
    j["succeeded"] = result.succeeded;
    json runs = json::array();
    for (const RunRecord& run : result.runs) {
        json r;
        r["seed"] = run.seed;
        r["error"] = run.error.empty() ? json(nullptr) : json(run.error);
        r["wall_time_seconds"] = run.wall_time_seconds;
        r["final_valid"] = eval_metrics_to_json(run.final_valid);
        r["final_test"] = eval_metrics_to_json(run.final_test);
        json epochs = json::array();
        for (const EpochMetrics& em : run.history) {
            auto put = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
            epochs.push_back(json{{"epoch", em.epoch},
                                  {"learning_rate", em.learning_rate},
                                  {"train_loss", em.train_loss},
                                  {"valid_loss", put(em.valid_loss)},
                                  {"valid_metric", put(em.valid_metric)}});
        }
        r["epochs"] = std::move(epochs);
        runs.push_back(std::move(r));
    }
    j["runs"] = std::move(runs);
    j["ensemble"] = {{"valid", eval_metrics_to_json(result.ensemble_valid)},
                     {"test", eval_metrics_to_json(result.ensemble_test)}};
    j["seed_summary"] = {{"valid",
                          {{"mean", eval_metrics_to_json(result.seed_mean_valid)},
                           {"std", eval_metrics_to_json(result.seed_std_valid)}}},
                         {"test",
                          {{"mean", eval_metrics_to_json(result.seed_mean_test)},
                           {"std", eval_metrics_to_json(result.seed_std_test)}}}};
    return j;
}

// Per-epoch metrics CSV across all seeds. Deterministic for fixed inputs, so
// repeated runs produce byte-identical files.
inline std::string epoch_metrics_csv(const std::vector<RunRecord>& runs) {
    std::string out = "seed,epoch,learning_rate,train_loss,valid_loss,valid_metric\n";
    for (const RunRecord& run : runs) {
        for (const EpochMetrics& em : run.history) {
            out += std::to_string(run.seed) + "," + std::to_string(em.epoch) + "," +
                   format_double(em.learning_rate) + "," + format_double(em.train_loss) + "," +
                   format_double(em.valid_loss) + "," + format_double(em.valid_metric) + "\n";
        }
    }
    return out;
}

inline std::string eval_metrics_csv(
    const std::vector<std::pair<std::string, EvalMetrics>>& rows) {
    std::string out = "split,mae,rmse,r2,roc_auc\n";
    for (const auto& [name, m] : rows)
        out += name + "," + format_double(m.mae) + "," + format_double(m.rmse) + "," +
               format_double(m.r2) + "," + format_double(m.roc_auc) + "\n";
    return out;
}

inline std::string fingerprint_csv(const std::vector<Fingerprint>& fps) {
    std::size_t width = 0;
    for (const Fingerprint& fp : fps) width = std::max(width, fp.values.size());
    std::string out = "id";
    for (std::size_t i = 0; i < width; ++i) out += ",v" + std::to_string(i);
    out += "\n";
    for (const Fingerprint& fp : fps) {
        out += fp.graph_id;
        for (double v : fp.values) out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

inline std::string fingerprint_jsonl(const std::vector<Fingerprint>& fps) {
    std::string out;
    for (const Fingerprint& fp : fps) {
        json j{{"id", fp.graph_id},
               {"views", fp.views},
               {"pooling", fp.pooling},
               {"gamma", fp.gamma},
               {"values", detail::vector_to_json(fp.values)}};
        out += j.dump() + "\n";
    }
    return out;
}

inline std::string error_report_json(const std::vector<ProcessingError>& errors) {
    json arr = json::array();
    for (const ProcessingError& e : errors) arr.push_back({{"id", e.id}, {"message", e.message}});
    return json{{"errors", arr}}.dump(2) + "\n";
}

}  // namespace ranwalk
