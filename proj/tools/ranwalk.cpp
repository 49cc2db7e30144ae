// SPDX-License-Identifier: Apache-2.0
//
// ranwalk CLI: batch graph processing, fingerprint export, shallow-model
// training/evaluation, and invariant diagnostics.
//
// Exit codes: 0 ok, 1 fatal error, 2 partial per-graph failures,
// 3 invariant-check failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ranwalk/io.hpp"

namespace fs = std::filesystem;
using namespace ranwalk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitPartial = 2;
constexpr int kExitInvariant = 3;

// The only supported environment variable: relative output paths resolve
// under RANWALK_OUTPUT_DIR when it is set. Science parameters are flags or
// config-file entries only.
fs::path resolve_output(const fs::path& p) {
    const char* base = std::getenv("RANWALK_OUTPUT_DIR");
    if (base != nullptr && *base != '\0' && p.is_relative()) return fs::path(base) / p;
    return p;
}

std::string safe_filename(const std::string& id) {
    std::string out = id;
    for (char& c : out)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '_' && c != '-')
            c = '_';
    return out.empty() ? "graph" : out;
}

std::vector<fs::path> sorted_json_files(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    return files;
}

struct GatheredGraphs {
    std::vector<std::pair<std::string, AttributedGraph>> graphs;
    std::vector<ProcessingError> errors;
};

// Accepts a directory of graph .json files, a .jsonl manifest, or a single
// graph document.
GatheredGraphs gather_graphs(const fs::path& input) {
    GatheredGraphs out;
    if (fs::is_directory(input)) {
        std::vector<GraphDocument> docs;
        for (const fs::path& p : sorted_json_files(input)) {
            try {
                docs.push_back(load_graph_file(p));
            } catch (const std::exception& e) {
                out.errors.push_back({p.stem().string(), e.what()});
            }
        }
        std::vector<VocabularyColumn> vocab = detail::dataset_vocabulary(docs);
        for (GraphDocument& doc : docs) {
            try {
                out.graphs.emplace_back(doc.id, build_graph(doc, vocab));
            } catch (const std::exception& e) {
                out.errors.push_back({doc.id, e.what()});
            }
        }
        return out;
    }
    if (input.extension() == ".jsonl") {
        LoadedManifest loaded = load_manifest(input);
        out.errors = std::move(loaded.errors);
        for (ManifestRecord& r : loaded.manifest.records)
            out.graphs.emplace_back(std::move(r.id), std::move(r.graph));
        return out;
    }
    GraphDocument doc = load_graph_file(input);  // fatal on unreadable single file
    try {
        out.graphs.emplace_back(doc.id, build_graph(doc, detail::dataset_vocabulary({doc})));
    } catch (const std::exception& e) {
        out.errors.push_back({doc.id, e.what()});
    }
    return out;
}

void report_errors(const std::vector<ProcessingError>& errors, const fs::path& report_path) {
    if (errors.empty()) return;
    for (const ProcessingError& e : errors)
        std::cerr << "error: graph \"" << e.id << "\": " << e.message << "\n";
    atomic_write(report_path, error_report_json(errors));
    std::cerr << "error report written to " << report_path.string() << "\n";
}

// --- process ---------------------------------------------------------------

int cmd_process(const fs::path& input, const fs::path& output_flag, double gamma,
                const std::string& views) {
    const fs::path output = resolve_output(output_flag);
    const ViewSelection sel = ViewSelection::parse(views, gamma);
    if (!(gamma > 0.0 && gamma <= 1.0)) throw GammaOutOfRangeError(gamma);
    GatheredGraphs gathered = gather_graphs(input);
    fs::create_directories(output);
    std::vector<ProcessingError> errors = std::move(gathered.errors);
    std::size_t written = 0;
    for (const auto& [id, graph] : gathered.graphs) {
        try {
            ProcessedGraph bundle = process_graph(graph, id, sel);
            atomic_write(output / (safe_filename(id) + ".bundle.json"),
                         bundle_to_json(bundle, gamma).dump(2) + "\n");
            ++written;
        } catch (const std::exception& e) {
            errors.push_back({id, e.what()});
        }
    }
    std::cout << "wrote " << written << " bundle(s) to " << output.string() << "\n";
    report_errors(errors, output / "errors.json");
    return errors.empty() ? kExitOk : kExitPartial;
}

// --- fingerprint -----------------------------------------------------------

int cmd_fingerprint(const fs::path& input, const fs::path& output_flag, const std::string& views,
                    const std::string& pooling, double gamma, const std::string& jsonl) {
    const fs::path output = resolve_output(output_flag);
    const ViewSelection sel = ViewSelection::parse(views, gamma);
    if (!(gamma > 0.0 && gamma <= 1.0)) throw GammaOutOfRangeError(gamma);
    const PoolingSpec pools = PoolingSpec::parse(pooling, sel.size());
    GatheredGraphs gathered = gather_graphs(input);
    std::vector<ProcessingError> errors = std::move(gathered.errors);
    std::vector<Fingerprint> fps;
    for (const auto& [id, graph] : gathered.graphs) {
        try {
            const ValidationReport report = validate_graph(graph);
            if (!report.ok()) throw Error("invalid graph: " + report.summary());
            const RepairResult repaired = repair(graph);
            fps.push_back(fingerprint(repaired.graph, sel, pools, id));
        } catch (const std::exception& e) {
            errors.push_back({id, e.what()});
        }
    }
    if (output.has_parent_path()) fs::create_directories(output.parent_path());
    atomic_write(output, fingerprint_csv(fps));
    if (!jsonl.empty()) atomic_write(resolve_output(fs::path(jsonl)), fingerprint_jsonl(fps));
    std::cout << "wrote " << fps.size() << " fingerprint(s) to " << output.string() << "\n";
    report_errors(errors, fs::path(output.string() + ".errors.json"));
    return errors.empty() ? kExitOk : kExitPartial;
}

// --- train -----------------------------------------------------------------

int cmd_train(const fs::path& manifest_path, const fs::path& config_path, std::uint64_t seed,
              bool seed_given, std::size_t n_seeds, const fs::path& checkpoint_flag,
              const fs::path& metrics_flag) {
    const fs::path checkpoint_out = resolve_output(checkpoint_flag);
    const fs::path metrics_out = resolve_output(metrics_flag);
    ExperimentConfig cfg = parse_experiment_config(json::parse(read_file(config_path)));
    if (seed_given) cfg.train.seed = seed;
    LoadedManifest loaded = load_manifest(manifest_path);
    ProcessedStore store = process_dataset(loaded.manifest, cfg.model.selection);
    std::vector<ProcessingError> errors = std::move(loaded.errors);
    errors.insert(errors.end(), store.errors.begin(), store.errors.end());

    ExperimentResult result =
        run_experiment(store, loaded.manifest, cfg.model, cfg.train, n_seeds);

    fs::create_directories(checkpoint_out);
    fs::create_directories(metrics_out);
    std::size_t model_idx = 0;
    for (const RunRecord& run : result.runs) {
        if (!run.ok()) {
            std::cerr << "error: seed " << run.seed << " failed: " << run.error << "\n";
            continue;
        }
        TrainConfig seed_cfg = cfg.train;
        seed_cfg.seed = run.seed;
        atomic_write(checkpoint_out / ("checkpoint_seed" + std::to_string(run.seed) + ".json"),
                     checkpoint_to_json(result.models[model_idx], seed_cfg, run.seed).dump(2) +
                         "\n");
        ++model_idx;
    }
    atomic_write(metrics_out / "metrics.csv", epoch_metrics_csv(result.runs));
    atomic_write(metrics_out / "run_record.json",
                 experiment_to_json(result, cfg, n_seeds).dump(2) + "\n");
    std::cout << "trained " << result.succeeded << "/" << n_seeds << " seed(s); checkpoints in "
              << checkpoint_out.string() << ", metrics in " << metrics_out.string() << "\n";

    report_errors(errors, metrics_out / "errors.json");
    if (result.succeeded == 0) {
        std::cerr << "error: every seed failed\n";
        return kExitFatal;
    }
    return (errors.empty() && result.succeeded == n_seeds) ? kExitOk : kExitPartial;
}

// --- eval ------------------------------------------------------------------

void require_matching_config(const ModelConfig& a, const ModelConfig& b) {
    if (a.selection != b.selection || a.pooling != b.pooling || a.hidden_dim != b.hidden_dim ||
        a.output_dim != b.output_dim || a.activation != b.activation ||
        a.graphnorm != b.graphnorm || a.task != b.task ||
        (a.input_dim != 0 && a.input_dim != b.input_dim))
        throw DimensionMismatchError("checkpoint configuration does not match --config");
}

int cmd_eval(const fs::path& manifest_path, const fs::path& config_path,
             const std::vector<std::string>& checkpoint_in, const fs::path& metrics_flag) {
    const fs::path metrics_out = resolve_output(metrics_flag);
    ExperimentConfig cfg = parse_experiment_config(json::parse(read_file(config_path)));
    std::vector<fs::path> ckpt_files;
    for (const std::string& c : checkpoint_in) {
        const fs::path p(c);
        if (fs::is_directory(p)) {
            for (const fs::path& f : sorted_json_files(p)) ckpt_files.push_back(f);
        } else {
            ckpt_files.push_back(p);
        }
    }
    if (ckpt_files.empty()) throw Error("no checkpoints given");
    std::vector<ShallowModel> models;
    for (const fs::path& p : ckpt_files) {
        Checkpoint ck = checkpoint_from_json(json::parse(read_file(p)));
        require_matching_config(cfg.model, ck.model.config);
        if (!models.empty() && !(models.front().config == ck.model.config))
            throw DimensionMismatchError("ensemble checkpoints disagree on configuration");
        models.push_back(std::move(ck.model));
    }

    LoadedManifest loaded = load_manifest(manifest_path);
    ProcessedStore store = process_dataset(loaded.manifest, models.front().config.selection);
    std::vector<ProcessingError> errors = std::move(loaded.errors);
    errors.insert(errors.end(), store.errors.begin(), store.errors.end());
    const detail::SplitSamples samples =
        detail::assemble_samples(store, loaded.manifest, models.front().config.selection);

    const TaskType task = models.front().config.task;
    std::vector<std::pair<std::string, EvalMetrics>> rows;
    if (!samples.train.empty()) rows.emplace_back("train", evaluate(models, samples.train, task));
    if (!samples.valid.empty()) rows.emplace_back("valid", evaluate(models, samples.valid, task));
    if (!samples.test.empty()) rows.emplace_back("test", evaluate(models, samples.test, task));
    if (rows.empty()) throw Error("manifest has no usable split");

    fs::create_directories(metrics_out);
    atomic_write(metrics_out / "eval_metrics.csv", eval_metrics_csv(rows));
    for (const auto& [name, m] : rows)
        std::cout << name << ": mae=" << format_double(m.mae) << " rmse=" << format_double(m.rmse)
                  << " r2=" << format_double(m.r2) << " roc_auc=" << format_double(m.roc_auc)
                  << "\n";
    report_errors(errors, metrics_out / "errors.json");
    return errors.empty() ? kExitOk : kExitPartial;
}

// --- check -----------------------------------------------------------------

struct CheckResult {
    bool ok = true;

    void note(bool pass) { ok = ok && pass; }
};

const char* mark(bool pass) { return pass ? "ok" : "FAIL"; }

bool check_graph(const std::string& id, const AttributedGraph& input, double gamma) {
    const RepairResult repaired = repair(input);
    const AttributedGraph& g = repaired.graph;
    const WalkView w1 = walk1_view(g);
    const WalkView w2 = walk2_view(g);
    const WalkView wg = walk_gamma_view(g, gamma);
    const WalkView w_one = walk_gamma_view(g, 1.0);

    const TransitionMatrix m1 = transition_matrix(g);
    const double stat1 = stationarity_residual(m1, w1.stationary);
    const double bal1 = detailed_balance_violation(m1, w1.stationary);
    const double stat2 = stationarity_residual(w2.adjacency, w2.stationary);
    const double statg =
        gamma_stationarity_residual(fractional_laplacian(laplacian(g), gamma));
    double ag_min = 0.0;
    for (double v : wg.adjacency.values()) ag_min = std::min(ag_min, v);
    const double g1_adj = max_abs_diff(w_one.adjacency, w1.adjacency);
    const double g1_pi = max_abs_diff(w_one.stationary, w1.stationary);

    bool oracle_ok = true;
    bool oracle_ran = false;
    if (g.node_count() <= kOracleMaxNodes) {
        oracle_ran = true;
        for (std::size_t i = 0; i < g.node_count() && oracle_ok; ++i)
            for (std::size_t j = 0; j < g.node_count() && oracle_ok; ++j) {
                if (i == j)
                    oracle_ok = w2.adjacency(i, j) == 0.0;
                else
                    oracle_ok = w2.adjacency(i, j) == count_walks_bruteforce(g, 2, i, j);
            }
    }

    CheckResult res;
    res.note(stat1 < kStationarityTol);
    res.note(bal1 < kDetailedBalanceTol);
    res.note(stat2 < kStationarityTol);
    res.note(statg < kGammaStationarityTol);
    res.note(ag_min >= 0.0);
    res.note(g1_adj < kGammaOneAdjacencyTol);
    res.note(g1_pi < kGammaOneStationaryTol);
    res.note(oracle_ok);

    std::printf("%-14s %4zu  %9.2e %9.2e %9.2e %9.2e %9.2e %9.2e %9.2e  %-6s %s\n", id.c_str(),
                g.node_count(), stat1, bal1, stat2, statg, ag_min, g1_adj, g1_pi,
                oracle_ran ? (oracle_ok ? "exact" : "FAIL") : "skip", mark(res.ok));
    return res.ok;
}

bool check_stored_view(const std::string& id, const char* name, const WalkView& view,
                       const Matrix& features, double stat_tol) {
    CheckResult res;
    const double pi_sum_err = std::abs(sum(view.stationary) - 1.0);
    res.note(pi_sum_err <= kDistributionSumTol);
    double pi_min = 0.0;
    for (double v : view.stationary) pi_min = std::min(pi_min, v);
    res.note(pi_min >= 0.0);
    const double asym = view.adjacency.rows() == view.adjacency.cols()
                            ? max_asymmetry(view.adjacency)
                            : 1.0;
    res.note(asym <= 1e-12);
    double diag_max = 0.0;
    for (double v : diagonal(view.adjacency)) diag_max = std::max(diag_max, std::abs(v));
    res.note(diag_max == 0.0);
    double adj_min = 0.0;
    for (double v : view.adjacency.values()) adj_min = std::min(adj_min, v);
    res.note(adj_min >= 0.0);
    const double xk_err = max_abs_diff(view.scaled_features, scale_rows(view.stationary, features));
    res.note(xk_err <= 1e-15);
    const double stat = stationarity_residual(view.adjacency, view.stationary);
    res.note(stat < stat_tol);

    std::printf("%-14s %-10s %9.2e %9.2e %9.2e %9.2e %9.2e  %s\n",
                (id + "/" + name).c_str(), name, pi_sum_err, asym, diag_max, xk_err, stat,
                mark(res.ok));
    return res.ok;
}

bool check_bundle(const BundleDocument& b) {
    bool ok = true;
    // repair record sanity
    bool repair_ok = b.repair.added_nodes.empty() == (b.repair.reason == RepairReason::none);
    for (std::size_t k = 0; k < b.repair.added_nodes.size(); ++k)
        repair_ok = repair_ok && b.repair.added_nodes[k] == b.repair.original_node_count + k;
    repair_ok = repair_ok && b.repair.original_node_count + b.repair.added_nodes.size() == b.n;
    if (!repair_ok) {
        std::printf("%-14s repair record inconsistent  FAIL\n", b.id.c_str());
        ok = false;
    }
    if (b.views.walk1)
        ok = check_stored_view(b.id, "walk1", *b.views.walk1, b.features, kStationarityTol) && ok;
    if (b.views.walk2)
        ok = check_stored_view(b.id, "walk2", *b.views.walk2, b.features, kStationarityTol) && ok;
    if (b.views.walk_gamma)
        ok = check_stored_view(b.id, "walk_gamma", *b.views.walk_gamma, b.features,
                               kGammaStationarityTol) && ok;
    return ok;
}

int cmd_check(const fs::path& input, double gamma) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw GammaOutOfRangeError(gamma);
    std::vector<std::pair<std::string, AttributedGraph>> graphs;
    std::vector<BundleDocument> bundles;

    auto sniff_file = [&](const fs::path& p) {
        const json doc = json::parse(read_file(p));
        if (doc.is_object() && doc.contains("views")) {
            bundles.push_back(parse_bundle(doc));
        } else {
            GraphDocument gd = parse_graph_document(doc);
            if (gd.id.empty()) gd.id = p.stem().string();
            graphs.emplace_back(gd.id, build_graph(gd, detail::dataset_vocabulary({gd})));
        }
    };
    if (fs::is_directory(input)) {
        for (const fs::path& p : sorted_json_files(input)) sniff_file(p);
    } else if (input.extension() == ".jsonl") {
        LoadedManifest loaded = load_manifest(input);
        if (!loaded.errors.empty()) {
            for (const ProcessingError& e : loaded.errors)
                std::cerr << "error: graph \"" << e.id << "\": " << e.message << "\n";
            return kExitFatal;
        }
        for (ManifestRecord& r : loaded.manifest.records)
            graphs.emplace_back(std::move(r.id), std::move(r.graph));
    } else {
        sniff_file(input);
    }

    bool all_ok = true;
    if (!graphs.empty()) {
        std::printf("%-14s %4s  %9s %9s %9s %9s %9s %9s %9s  %-6s %s\n", "graph", "n", "stat1",
                    "bal1", "stat2", "statg", "agmin", "g1adj", "g1pi", "a2", "status");
        for (const auto& [id, g] : graphs) {
            const ValidationReport report = validate_graph(g);
            if (!report.ok()) throw Error("graph \"" + id + "\" invalid: " + report.summary());
            all_ok = check_graph(id, g, gamma) && all_ok;
        }
    }
    if (!bundles.empty()) {
        std::printf("%-14s %-10s %9s %9s %9s %9s %9s  %s\n", "bundle/view", "kind", "pisum",
                    "asym", "diag", "xk", "stat", "status");
        for (const BundleDocument& b : bundles) all_ok = check_bundle(b) && all_ok;
    }
    if (graphs.empty() && bundles.empty()) throw Error("no graphs or bundles found in input");
    std::printf("%s\n", all_ok ? "all checks passed" : "INVARIANT FAILURES DETECTED");
    return all_ok ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random-walk graph preprocessing and shallow property prediction"};
    app.require_subcommand(1);

    std::string input, output, views = "x1,x2,xg", pooling = "mean", jsonl;
    double gamma = 0.1;

    CLI::App* process = app.add_subcommand("process", "expand graphs into walk-view bundles");
    process->add_option("--input", input, "graph .json dir, graph file, or .jsonl manifest")
        ->required();
    process->add_option("--output", output, "output directory for bundles")->required();
    process->add_option("--gamma", gamma, "fractional walk length in (0, 1]");
    process->add_option("--views", views, "comma list from x,x1,x2,xg");

    CLI::App* fingerprint = app.add_subcommand("fingerprint", "export pooled graph fingerprints");
    fingerprint->add_option("--input", input, "graph .json dir, graph file, or .jsonl manifest")
        ->required();
    fingerprint->add_option("--output", output, "output CSV path")->required();
    fingerprint->add_option("--views", views, "comma list from x,x1,x2,xg");
    fingerprint->add_option("--pooling", pooling,
                            "mean|sum|max|mean_scaled_by_max, single or per-view comma list");
    fingerprint->add_option("--gamma", gamma, "fractional walk length in (0, 1]");
    fingerprint->add_option("--jsonl", jsonl, "also write JSON-lines to this path");

    std::string manifest, config, checkpoint_out, metrics_out;
    std::vector<std::string> checkpoint_in;
    std::uint64_t seed = 0;
    std::size_t n_seeds = 1;

    CLI::App* train = app.add_subcommand("train", "train shallow models over manifest splits");
    train->add_option("--manifest", manifest, ".jsonl manifest")->required();
    train->add_option("--config", config, "experiment config .json")->required();
    CLI::Option* seed_opt = train->add_option("--seed", seed, "base seed (overrides config)");
    train->add_option("--seeds", n_seeds, "number of seeds (ensemble size)");
    train->add_option("--checkpoint-out", checkpoint_out, "checkpoint directory")->required();
    train->add_option("--metrics-out", metrics_out, "metrics directory")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate checkpoints on manifest splits");
    eval->add_option("--manifest", manifest, ".jsonl manifest")->required();
    eval->add_option("--config", config, "experiment config .json")->required();
    eval->add_option("--checkpoint-in", checkpoint_in, "checkpoint file(s) or directory")
        ->required();
    eval->add_option("--metrics-out", metrics_out, "metrics directory")->required();

    CLI::App* check = app.add_subcommand("check", "run the invariant suite on graphs or bundles");
    check->add_option("--input", input, "graph/bundle .json dir, file, or .jsonl manifest")
        ->required();
    check->add_option("--gamma", gamma, "fractional walk length in (0, 1]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitFatal;
    }

    try {
        if (app.got_subcommand(process)) return cmd_process(input, output, gamma, views);
        if (app.got_subcommand(fingerprint))
            return cmd_fingerprint(input, output, views, pooling, gamma, jsonl);
        if (app.got_subcommand(train))
            return cmd_train(manifest, config, seed, seed_opt->count() > 0, n_seeds,
                             checkpoint_out, metrics_out);
        if (app.got_subcommand(eval)) return cmd_eval(manifest, config, checkpoint_in, metrics_out);
        if (app.got_subcommand(check)) return cmd_check(input, gamma);
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFatal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFatal;
    }
    return kExitFatal;
}
