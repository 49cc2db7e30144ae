// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ranwalk/errors.hpp"
#include "ranwalk/features.hpp"
#include "ranwalk/matrix.hpp"
#include "ranwalk/rng.hpp"

namespace ranwalk {

inline constexpr double kGraphNormEpsilon = 1e-5;
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;
inline constexpr double kDefaultWeightDecay = 0.01;

enum class Activation { relu, tanh, sigmoid, identity };
enum class TaskType { regression, binary_classification };
enum class LossKind { mse, bce_with_logits };
enum class OptimizerKind { adam, adamw };
enum class SchedulerKind { none, step, plateau };

inline std::string to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
        case Activation::sigmoid: return "sigmoid";
        case Activation::identity: return "identity";
    }
    return "relu";
}

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    if (s == "identity" || s == "none") return Activation::identity;
    throw ParseError("unknown activation \"" + s + "\"");
}

inline std::string to_string(TaskType t) {
    return t == TaskType::regression ? "regression" : "binary_classification";
}

inline TaskType task_from_string(const std::string& s) {
    if (s == "regression") return TaskType::regression;
    if (s == "binary_classification" || s == "classification")
        return TaskType::binary_classification;
    throw ParseError("unknown task \"" + s + "\"");
}

inline std::string to_string(LossKind k) {
    return k == LossKind::mse ? "mse" : "bce_with_logits";
}

inline LossKind loss_from_string(const std::string& s) {
    if (s == "mse") return LossKind::mse;
    if (s == "bce_with_logits" || s == "bce") return LossKind::bce_with_logits;
    throw ParseError("unknown loss \"" + s + "\"");
}

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::adam ? "adam" : "adamw"; }

inline OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::adam;
    if (s == "adamw") return OptimizerKind::adamw;
    throw ParseError("unknown optimizer \"" + s + "\"");
}

inline std::string to_string(SchedulerKind k) {
    switch (k) {
        case SchedulerKind::none: return "none";
        case SchedulerKind::step: return "step";
        case SchedulerKind::plateau: return "plateau";
    }
    return "none";
}

inline SchedulerKind scheduler_from_string(const std::string& s) {
    if (s == "none") return SchedulerKind::none;
    if (s == "step") return SchedulerKind::step;
    if (s == "plateau") return SchedulerKind::plateau;
    throw ParseError("unknown scheduler \"" + s + "\"");
}

struct ModelConfig {
    ViewSelection selection;
    PoolingSpec pooling;
    std::size_t input_dim = 0;  // 0 = infer from data
    std::size_t hidden_dim = 16;
    std::size_t output_dim = 1;
    Activation activation = Activation::relu;
    bool graphnorm = true;
    TaskType task = TaskType::regression;

    std::size_t concat_dim() const { return selection.size() * hidden_dim; }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Learnable per-view normalization parameters: mean-scale alpha, scale and
// shift, each of length hidden_dim.
struct GraphNormParams {
    Vector alpha;
    Vector scale;
    Vector shift;

    friend bool operator==(const GraphNormParams&, const GraphNormParams&) = default;
};

struct ShallowModel {
    ModelConfig config;
    Matrix embed_weight;  // hidden x input
    Vector embed_bias;    // hidden
    std::vector<GraphNormParams> norms;  // one per selected view
    Matrix head_weight;   // output x concat
    Vector head_bias;     // output

    friend bool operator==(const ShallowModel&, const ShallowModel&) = default;
};

namespace detail {

inline void fill_uniform(Rng& rng, Vector& v, double bound) {
    for (double& x : v) x = rng.uniform(-bound, bound);
}

}  // namespace detail

// Deterministic initialization: weights uniform in [-1/sqrt(fan_in),
// +1/sqrt(fan_in)] drawn in row-major order, biases zero, alpha = scale = 1,
// shift = 0.
inline ShallowModel init_model(const ModelConfig& cfg, Rng& rng) {
    if (cfg.input_dim == 0) throw DimensionMismatchError("model input_dim must be set");
    if (cfg.hidden_dim == 0 || cfg.output_dim == 0)
        throw DimensionMismatchError("model dims must be positive");
    if (cfg.pooling.ops.size() != cfg.selection.size())
        throw DimensionMismatchError("pooling spec does not match view selection");
    ShallowModel m;
    m.config = cfg;
    m.embed_weight = Matrix(cfg.hidden_dim, cfg.input_dim);
    detail::fill_uniform(rng, m.embed_weight.values(),
                         1.0 / std::sqrt(static_cast<double>(cfg.input_dim)));
    m.embed_bias.assign(cfg.hidden_dim, 0.0);
    m.norms.resize(cfg.selection.size());
    for (GraphNormParams& p : m.norms) {
        p.alpha.assign(cfg.hidden_dim, 1.0);
        p.scale.assign(cfg.hidden_dim, 1.0);
        p.shift.assign(cfg.hidden_dim, 0.0);
    }
    m.head_weight = Matrix(cfg.output_dim, cfg.concat_dim());
    detail::fill_uniform(rng, m.head_weight.values(),
                         1.0 / std::sqrt(static_cast<double>(cfg.concat_dim())));
    m.head_bias.assign(cfg.output_dim, 0.0);
    return m;
}

inline ShallowModel init_model(const ModelConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    return init_model(cfg, rng);
}

// Per-graph model input: one n x input_dim feature matrix per selected view,
// in selection order.
struct ModelInput {
    std::vector<Matrix> features;
};

inline ModelInput model_input(const AttributedGraph& g, const ViewSet& views,
                              const ViewSelection& sel) {
    return {selected_feature_matrices(g, views, sel)};
}

// A training/evaluation sample. mask marks which task labels are present.
struct LabeledGraph {
    ModelInput input;
    Vector labels;
    std::vector<std::uint8_t> mask;
};

// ---------------------------------------------------------------------------
// GraphNorm
//
// Per feature column j over the graph's n node rows:
//   mu_j   = mean(x[:, j])
//   v[:,j] = x[:, j] - alpha_j * mu_j
//   s_j    = sqrt(mean(v[:, j]^2) + eps)
//   out    = scale_j * v[:, j] / s_j + shift_j
// ---------------------------------------------------------------------------

struct GraphNormCache {
    Matrix shifted;   // v
    Vector mu;        // column means of x
    Vector inv_std;   // 1 / s
};

inline Matrix graphnorm_forward(const Matrix& x, const GraphNormParams& p, GraphNormCache& cache) {
    const std::size_t n = x.rows();
    const std::size_t h = x.cols();
    if (p.alpha.size() != h)
        throw DimensionMismatchError("graphnorm parameter size does not match features");
    if (n == 0) throw Error("graphnorm: empty feature matrix");
    cache.shifted = Matrix(n, h);
    cache.mu.assign(h, 0.0);
    cache.inv_std.assign(h, 0.0);
    Matrix out(n, h);
    for (std::size_t j = 0; j < h; ++j) {
        double mu = 0.0;
        for (std::size_t i = 0; i < n; ++i) mu += x(i, j);
        mu /= static_cast<double>(n);
        double msq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = x(i, j) - p.alpha[j] * mu;
            cache.shifted(i, j) = v;
            msq += v * v;
        }
        msq /= static_cast<double>(n);
        const double inv_s = 1.0 / std::sqrt(msq + kGraphNormEpsilon);
        cache.mu[j] = mu;
        cache.inv_std[j] = inv_s;
        for (std::size_t i = 0; i < n; ++i)
            out(i, j) = p.scale[j] * cache.shifted(i, j) * inv_s + p.shift[j];
    }
    return out;
}

inline Matrix graphnorm(const Matrix& x, const GraphNormParams& p) {
    GraphNormCache cache;
    return graphnorm_forward(x, p, cache);
}

// Backward pass; accumulates parameter gradients into dp.
inline void graphnorm_backward(const GraphNormCache& cache, const GraphNormParams& p,
                               const Matrix& dout, Matrix& dx, GraphNormParams& dp) {
    const std::size_t n = cache.shifted.rows();
    const std::size_t h = cache.shifted.cols();
    dx = Matrix(n, h);
    for (std::size_t j = 0; j < h; ++j) {
        const double inv_s = cache.inv_std[j];
        double grad_dot_v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = dout(i, j);
            dp.shift[j] += g;
            dp.scale[j] += g * cache.shifted(i, j) * inv_s;
            grad_dot_v += g * cache.shifted(i, j);
        }
        // dL/dv_i = scale * inv_s * (g_i - (sum_k g_k v_k) v_i inv_s^2 / n)
        double dv_sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dv = p.scale[j] * inv_s *
                              (dout(i, j) - grad_dot_v * cache.shifted(i, j) * inv_s * inv_s /
                                                static_cast<double>(n));
            dx(i, j) = dv;  // temporary: dL/dv
            dv_sum += dv;
        }
        dp.alpha[j] += -cache.mu[j] * dv_sum;
        // v_i = x_i - alpha * mean(x): dL/dx_l = dv_l - (alpha / n) * sum_i dv_i
        const double correction = p.alpha[j] * dv_sum / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) dx(i, j) -= correction;
    }
}

// ---------------------------------------------------------------------------
// Forward pass: embed -> (graphnorm) -> activation -> pool per view,
// concatenate, linear head.
// ---------------------------------------------------------------------------

inline double apply_activation(Activation a, double x) {
    switch (a) {
        case Activation::relu: return x > 0.0 ? x : 0.0;
        case Activation::tanh: return std::tanh(x);
        case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
        case Activation::identity: return x;
    }
    return x;
}

// Derivative of the activation given pre-activation g and post-activation z.
inline double activation_grad(Activation a, double pre, double post) {
    switch (a) {
        case Activation::relu: return pre > 0.0 ? 1.0 : 0.0;
        case Activation::tanh: return 1.0 - post * post;
        case Activation::sigmoid: return post * (1.0 - post);
        case Activation::identity: return 1.0;
    }
    return 1.0;
}

struct ForwardTrace {
    std::vector<Matrix> inputs;          // per view: n x c (borrowed copies)
    std::vector<Matrix> pre_norm;        // H = embed output
    std::vector<GraphNormCache> caches;  // when graphnorm enabled
    std::vector<Matrix> pre_act;         // G
    std::vector<Matrix> post_act;        // Z
    Vector concat;                       // pooled, concatenated
};

inline Vector forward(const ShallowModel& model, const ModelInput& input, ForwardTrace* trace) {
    const ModelConfig& cfg = model.config;
    const std::size_t k = cfg.selection.size();
    if (input.features.size() != k)
        throw DimensionMismatchError("model input has " + std::to_string(input.features.size()) +
                                     " views, expected " + std::to_string(k));
    if (trace != nullptr) {
        trace->inputs.clear();
        trace->pre_norm.clear();
        trace->caches.clear();
        trace->pre_act.clear();
        trace->post_act.clear();
    }
    Vector concat;
    concat.reserve(cfg.concat_dim());
    for (std::size_t v = 0; v < k; ++v) {
        const Matrix& f = input.features[v];
        if (f.cols() != cfg.input_dim)
            throw DimensionMismatchError("view " + std::to_string(v) + " has feature dim " +
                                         std::to_string(f.cols()) + ", model expects " +
                                         std::to_string(cfg.input_dim));
        if (f.rows() == 0) throw Error("model input view has no nodes");
        const std::size_t n = f.rows();
        const std::size_t h = cfg.hidden_dim;
        Matrix embedded(n, h);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < h; ++a) {
                double acc = model.embed_bias[a];
                for (std::size_t c = 0; c < cfg.input_dim; ++c)
                    acc += f(i, c) * model.embed_weight(a, c);
                embedded(i, a) = acc;
            }
        Matrix pre_act;
        GraphNormCache cache;
        if (cfg.graphnorm) {
            pre_act = graphnorm_forward(embedded, model.norms[v], cache);
        } else {
            pre_act = embedded;
        }
        Matrix post_act(n, h);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < h; ++a)
                post_act(i, a) = apply_activation(cfg.activation, pre_act(i, a));
        Vector pooled = pool(post_act, cfg.pooling.ops[v]);
        concat.insert(concat.end(), pooled.begin(), pooled.end());
        if (trace != nullptr) {
            trace->inputs.push_back(f);
            trace->pre_norm.push_back(std::move(embedded));
            trace->caches.push_back(std::move(cache));
            trace->pre_act.push_back(std::move(pre_act));
            trace->post_act.push_back(std::move(post_act));
        }
    }
    if (model.head_weight.cols() != concat.size())
        throw DimensionMismatchError("head expects " + std::to_string(model.head_weight.cols()) +
                                     " inputs, got " + std::to_string(concat.size()));
    Vector out(cfg.output_dim, 0.0);
    for (std::size_t t = 0; t < cfg.output_dim; ++t) {
        double acc = model.head_bias[t];
        for (std::size_t m = 0; m < concat.size(); ++m) acc += model.head_weight(t, m) * concat[m];
        out[t] = acc;
    }
    if (trace != nullptr) trace->concat = std::move(concat);
    return out;
}

inline Vector forward(const ShallowModel& model, const ModelInput& input) {
    return forward(model, input, nullptr);
}

struct ModelGradients {
    Matrix embed_weight;
    Vector embed_bias;
    std::vector<GraphNormParams> norms;
    Matrix head_weight;
    Vector head_bias;

    static ModelGradients zeros_like(const ModelConfig& cfg) {
        ModelGradients g;
        g.embed_weight = Matrix(cfg.hidden_dim, cfg.input_dim);
        g.embed_bias.assign(cfg.hidden_dim, 0.0);
        g.norms.resize(cfg.selection.size());
        for (GraphNormParams& p : g.norms) {
            p.alpha.assign(cfg.hidden_dim, 0.0);
            p.scale.assign(cfg.hidden_dim, 0.0);
            p.shift.assign(cfg.hidden_dim, 0.0);
        }
        g.head_weight = Matrix(cfg.output_dim, cfg.concat_dim());
        g.head_bias.assign(cfg.output_dim, 0.0);
        return g;
    }
};

namespace detail {

// Backpropagate one sample's output gradient through the trace.
inline void backward(const ShallowModel& model, const ForwardTrace& trace, const Vector& dout,
                     ModelGradients& grads) {
    const ModelConfig& cfg = model.config;
    const std::size_t k = cfg.selection.size();
    const std::size_t h = cfg.hidden_dim;

    Vector dconcat(trace.concat.size(), 0.0);
    for (std::size_t t = 0; t < cfg.output_dim; ++t) {
        const double g = dout[t];
        if (g == 0.0) continue;
        grads.head_bias[t] += g;
        for (std::size_t m = 0; m < trace.concat.size(); ++m) {
            grads.head_weight(t, m) += g * trace.concat[m];
            dconcat[m] += model.head_weight(t, m) * g;
        }
    }

    for (std::size_t v = 0; v < k; ++v) {
        const Matrix& z = trace.post_act[v];
        const Matrix& g_pre = trace.pre_act[v];
        const std::size_t n = z.rows();
        const double* dpool = dconcat.data() + v * h;

        // pooling backward
        Matrix dz(n, h);
        switch (cfg.pooling.ops[v]) {
            case PoolingOp::mean:
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t a = 0; a < h; ++a)
                        dz(i, a) = dpool[a] / static_cast<double>(n);
                break;
            case PoolingOp::sum:
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t a = 0; a < h; ++a) dz(i, a) = dpool[a];
                break;
            case PoolingOp::max:
                for (std::size_t a = 0; a < h; ++a) {
                    std::size_t arg = 0;
                    for (std::size_t i = 1; i < n; ++i)
                        if (z(i, a) > z(arg, a)) arg = i;
                    dz(arg, a) += dpool[a];
                }
                break;
            case PoolingOp::mean_scaled_by_max:
                for (std::size_t a = 0; a < h; ++a) {
                    std::size_t arg = 0;
                    double acc = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        acc += z(i, a);
                        if (z(i, a) > z(arg, a)) arg = i;
                    }
                    const double mean = acc / static_cast<double>(n);
                    const double mx = z(arg, a);
                    for (std::size_t i = 0; i < n; ++i)
                        dz(i, a) = dpool[a] * mx / static_cast<double>(n);
                    dz(arg, a) += dpool[a] * mean;
                }
                break;
        }

        // activation backward
        Matrix dg(n, h);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t a = 0; a < h; ++a)
                dg(i, a) = dz(i, a) * activation_grad(cfg.activation, g_pre(i, a), z(i, a));

        // graphnorm backward
        Matrix dh;
        if (cfg.graphnorm) {
            graphnorm_backward(trace.caches[v], model.norms[v], dg, dh, grads.norms[v]);
        } else {
            dh = std::move(dg);
        }

        // embed backward: H = F W^T + 1 b^T
        const Matrix& f = trace.inputs[v];
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t a = 0; a < h; ++a) {
                const double g = dh(i, a);
                if (g == 0.0) continue;
                grads.embed_bias[a] += g;
                for (std::size_t c = 0; c < cfg.input_dim; ++c)
                    grads.embed_weight(a, c) += g * f(i, c);
            }
        }
    }
}

}  // namespace detail

struct LossResult {
    double loss = 0.0;
    ModelGradients gradients;
    std::size_t label_count = 0;
};

// Mean loss over every present label in the batch, with exact gradients for
// all parameters.
inline LossResult loss_and_gradients(const ShallowModel& model,
                                     const std::vector<const LabeledGraph*>& batch,
                                     LossKind kind) {
    if (batch.empty()) throw Error("loss_and_gradients: empty batch");
    const std::size_t t_dim = model.config.output_dim;
    std::size_t count = 0;
    for (const LabeledGraph* s : batch) {
        if (s->labels.size() != t_dim || s->mask.size() != t_dim)
            throw DimensionMismatchError("sample label arity does not match model output dim");
        for (std::size_t t = 0; t < t_dim; ++t) {
            if (!s->mask[t]) continue;
            if (!std::isfinite(s->labels[t])) throw NonFiniteLossError("label is not finite");
            ++count;
        }
    }
    if (count == 0) throw Error("loss_and_gradients: batch has no labels");

    LossResult result;
    result.gradients = ModelGradients::zeros_like(model.config);
    result.label_count = count;
    const double inv_count = 1.0 / static_cast<double>(count);
    ForwardTrace trace;
    Vector dout(t_dim);
    for (const LabeledGraph* s : batch) {
        const Vector pred = forward(model, s->input, &trace);
        std::fill(dout.begin(), dout.end(), 0.0);
        for (std::size_t t = 0; t < t_dim; ++t) {
            if (!s->mask[t]) continue;
            const double y = s->labels[t];
            const double z = pred[t];
            if (kind == LossKind::mse) {
                const double diff = z - y;
                result.loss += diff * diff * inv_count;
                dout[t] = 2.0 * diff * inv_count;
            } else {
                // numerically stable logistic loss on logits
                result.loss +=
                    (std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)))) * inv_count;
                const double sig = 1.0 / (1.0 + std::exp(-z));
                dout[t] = (sig - y) * inv_count;
            }
        }
        detail::backward(model, trace, dout, result.gradients);
    }
    if (!std::isfinite(result.loss)) throw NonFiniteLossError("loss is not finite");
    return result;
}

inline LossResult loss_and_gradients(const ShallowModel& model,
                                     const std::vector<LabeledGraph>& batch, LossKind kind) {
    std::vector<const LabeledGraph*> ptrs;
    ptrs.reserve(batch.size());
    for (const LabeledGraph& s : batch) ptrs.push_back(&s);
    return loss_and_gradients(model, ptrs, kind);
}

// Forward-only mean loss (validation).
inline double evaluate_loss(const ShallowModel& model, const std::vector<LabeledGraph>& data,
                            LossKind kind) {
    std::size_t count = 0;
    double total = 0.0;
    for (const LabeledGraph& s : data) {
        const Vector pred = forward(model, s.input);
        for (std::size_t t = 0; t < pred.size(); ++t) {
            if (!s.mask[t]) continue;
            const double y = s.labels[t];
            const double z = pred[t];
            if (kind == LossKind::mse) {
                total += (z - y) * (z - y);
            } else {
                total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
            }
            ++count;
        }
    }
    if (count == 0) return std::numeric_limits<double>::quiet_NaN();
    return total / static_cast<double>(count);
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t epochs = 100;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::adam;
    double weight_decay = kDefaultWeightDecay;  // adamw only
    SchedulerKind scheduler = SchedulerKind::none;
    std::size_t step_size = 50;      // step scheduler period
    double step_gamma = 0.5;         // step scheduler decay
    double plateau_factor = 0.1;     // plateau decay
    std::size_t plateau_patience = 10;
    LossKind loss = LossKind::mse;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct AdamState {
    ModelGradients m;
    ModelGradients v;
    std::size_t step = 0;

    static AdamState zeros_like(const ModelConfig& cfg) {
        return {ModelGradients::zeros_like(cfg), ModelGradients::zeros_like(cfg), 0};
    }
};

namespace detail {

template <typename Fn>
void visit_tensors(ShallowModel& model, ModelGradients& g, AdamState& st, Fn&& fn) {
    fn(model.embed_weight.values(), g.embed_weight.values(), st.m.embed_weight.values(),
       st.v.embed_weight.values());
    fn(model.embed_bias, g.embed_bias, st.m.embed_bias, st.v.embed_bias);
    if (model.config.graphnorm) {
        for (std::size_t k = 0; k < model.norms.size(); ++k) {
            fn(model.norms[k].alpha, g.norms[k].alpha, st.m.norms[k].alpha, st.v.norms[k].alpha);
            fn(model.norms[k].scale, g.norms[k].scale, st.m.norms[k].scale, st.v.norms[k].scale);
            fn(model.norms[k].shift, g.norms[k].shift, st.m.norms[k].shift, st.v.norms[k].shift);
        }
    }
    fn(model.head_weight.values(), g.head_weight.values(), st.m.head_weight.values(),
       st.v.head_weight.values());
    fn(model.head_bias, g.head_bias, st.m.head_bias, st.v.head_bias);
}

}  // namespace detail

inline void optimizer_step(ShallowModel& model, ModelGradients& grads, AdamState& state,
                           double learning_rate, const TrainConfig& cfg) {
    state.step += 1;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
    const bool decoupled = cfg.optimizer == OptimizerKind::adamw;
    detail::visit_tensors(model, grads, state,
                          [&](Vector& theta, Vector& g, Vector& m, Vector& v) {
                              for (std::size_t i = 0; i < theta.size(); ++i) {
                                  m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
                                  v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
                                  const double mhat = m[i] / bc1;
                                  const double vhat = v[i] / bc2;
                                  if (decoupled)
                                      theta[i] -= learning_rate * cfg.weight_decay * theta[i];
                                  theta[i] -= learning_rate * mhat / (std::sqrt(vhat) + kAdamEpsilon);
                              }
                          });
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

// Rank-statistic ROC-AUC with average ranks on ties (equivalent to the
// pairwise comparison count with half credit for score ties).
inline double roc_auc(const Vector& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DimensionMismatchError("roc_auc: scores/labels size mismatch");
    const std::size_t n = scores.size();
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += (y != 0);
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw DegenerateLabelsError();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // ranks are 1-based
        for (std::size_t k = i; k <= j; ++k)
            if (labels[order[k]] != 0) rank_sum_pos += avg_rank;
        i = j + 1;
    }
    const double u = rank_sum_pos -
                     static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// NaN marks a metric that does not apply to the task (or is undefined on the
// split, e.g. R^2 with zero label variance).
struct EvalMetrics {
    double mae = std::numeric_limits<double>::quiet_NaN();
    double rmse = std::numeric_limits<double>::quiet_NaN();
    double r2 = std::numeric_limits<double>::quiet_NaN();
    double roc_auc = std::numeric_limits<double>::quiet_NaN();
};

inline Vector ensemble_predict(std::span<const ShallowModel> models, const ModelInput& input) {
    if (models.empty()) throw EmptyEnsembleError();
    Vector acc = forward(models[0], input);
    for (std::size_t k = 1; k < models.size(); ++k) {
        const Vector p = forward(models[k], input);
        for (std::size_t t = 0; t < acc.size(); ++t) acc[t] += p[t];
    }
    for (double& x : acc) x /= static_cast<double>(models.size());
    return acc;
}

// Task metrics of (ensemble-averaged) predictions. Multi-task results are
// averaged over the tasks where the metric is defined; AUC throws
// DegenerateLabels when no task has both classes.
inline EvalMetrics evaluate(std::span<const ShallowModel> models,
                            const std::vector<LabeledGraph>& data, TaskType task) {
    if (models.empty()) throw EmptyEnsembleError();
    if (data.empty()) throw Error("evaluate: empty split");
    const std::size_t t_dim = models[0].config.output_dim;
    std::vector<Vector> preds;
    preds.reserve(data.size());
    for (const LabeledGraph& s : data) preds.push_back(ensemble_predict(models, s.input));

    EvalMetrics out;
    if (task == TaskType::regression) {
        double mae_sum = 0.0, rmse_sum = 0.0, r2_sum = 0.0;
        std::size_t mae_tasks = 0, r2_tasks = 0;
        for (std::size_t t = 0; t < t_dim; ++t) {
            double abs_err = 0.0, sq_err = 0.0, label_sum = 0.0;
            std::size_t cnt = 0;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (!data[i].mask[t]) continue;
                const double d = preds[i][t] - data[i].labels[t];
                abs_err += std::abs(d);
                sq_err += d * d;
                label_sum += data[i].labels[t];
                ++cnt;
            }
            if (cnt == 0) continue;
            mae_sum += abs_err / static_cast<double>(cnt);
            rmse_sum += std::sqrt(sq_err / static_cast<double>(cnt));
            ++mae_tasks;
            if (cnt >= 2) {
                const double mean = label_sum / static_cast<double>(cnt);
                double ss_tot = 0.0;
                for (std::size_t i = 0; i < data.size(); ++i)
                    if (data[i].mask[t]) {
                        const double d = data[i].labels[t] - mean;
                        ss_tot += d * d;
                    }
                if (ss_tot > 0.0) {
                    r2_sum += 1.0 - sq_err / ss_tot;
                    ++r2_tasks;
                }
            }
        }
        if (mae_tasks > 0) {
            out.mae = mae_sum / static_cast<double>(mae_tasks);
            out.rmse = rmse_sum / static_cast<double>(mae_tasks);
        }
        if (r2_tasks > 0) out.r2 = r2_sum / static_cast<double>(r2_tasks);
    } else {
        double auc_sum = 0.0;
        std::size_t auc_tasks = 0;
        for (std::size_t t = 0; t < t_dim; ++t) {
            Vector scores;
            std::vector<int> labels;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (!data[i].mask[t]) continue;
                scores.push_back(preds[i][t]);
                labels.push_back(data[i].labels[t] > 0.5 ? 1 : 0);
            }
            const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
            const bool has_neg = std::find(labels.begin(), labels.end(), 0) != labels.end();
            if (!has_pos || !has_neg) continue;
            auc_sum += roc_auc(scores, labels);
            ++auc_tasks;
        }
        if (auc_tasks == 0) throw DegenerateLabelsError();
        out.roc_auc = auc_sum / static_cast<double>(auc_tasks);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct EpochMetrics {
    std::size_t epoch = 0;        // 1-based
    double learning_rate = 0.0;   // rate used during this epoch
    double train_loss = 0.0;
    double valid_loss = std::numeric_limits<double>::quiet_NaN();
    double valid_metric = std::numeric_limits<double>::quiet_NaN();  // rmse or auc

    friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct TrainResult {
    ShallowModel model;
    std::vector<EpochMetrics> history;
};

// Deterministic given (config, seed, data): fixed init draw order and a fixed
// shuffle stream. learning_rate = 0 is admitted as a null update for tests.
inline TrainResult train(const std::vector<LabeledGraph>& train_set,
                         const std::vector<LabeledGraph>& valid_set, const ModelConfig& mcfg,
                         const TrainConfig& tcfg) {
    if (train_set.empty()) throw Error("train: empty training set");
    if (tcfg.epochs < 1) throw Error("train: epochs must be >= 1");
    if (tcfg.batch_size < 1) throw Error("train: batch_size must be >= 1");
    if (tcfg.learning_rate < 0.0) throw Error("train: negative learning rate");

    Rng rng(tcfg.seed);
    ShallowModel model = init_model(mcfg, rng);
    AdamState state = AdamState::zeros_like(mcfg);

    double lr = tcfg.learning_rate;
    double best_monitor = std::numeric_limits<double>::infinity();
    std::size_t stall = 0;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<const LabeledGraph*> batch;

    TrainResult result;
    result.history.reserve(tcfg.epochs);
    for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
        rng.shuffle(order);
        double loss_weighted = 0.0;
        std::size_t label_total = 0;
        for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
            const std::size_t stop = std::min(order.size(), start + tcfg.batch_size);
            batch.clear();
            for (std::size_t i = start; i < stop; ++i) batch.push_back(&train_set[order[i]]);
            LossResult res;
            try {
                res = loss_and_gradients(model, batch, tcfg.loss);
            } catch (const NonFiniteLossError& e) {
                throw NonFiniteLossError("epoch " + std::to_string(epoch) + ", batch " +
                                         std::to_string(start / tcfg.batch_size) + ": " + e.what());
            }
            optimizer_step(model, res.gradients, state, lr, tcfg);
            loss_weighted += res.loss * static_cast<double>(res.label_count);
            label_total += res.label_count;
        }

        EpochMetrics em;
        em.epoch = epoch;
        em.learning_rate = lr;
        em.train_loss = loss_weighted / static_cast<double>(label_total);
        if (!valid_set.empty()) {
            em.valid_loss = evaluate_loss(model, valid_set, tcfg.loss);
            try {
                const EvalMetrics vm = evaluate(std::span<const ShallowModel>(&model, 1), valid_set,
                                                mcfg.task);
                em.valid_metric = mcfg.task == TaskType::regression ? vm.rmse : vm.roc_auc;
            } catch (const DegenerateLabelsError&) {
                // single-class validation split: metric stays NaN
            }
        }
        result.history.push_back(em);

        if (tcfg.scheduler == SchedulerKind::step) {
            if (epoch % tcfg.step_size == 0) lr *= tcfg.step_gamma;
        } else if (tcfg.scheduler == SchedulerKind::plateau) {
            const double monitor = !valid_set.empty() && std::isfinite(em.valid_loss)
                                       ? em.valid_loss
                                       : em.train_loss;
            if (monitor < best_monitor - 1e-12) {
                best_monitor = monitor;
                stall = 0;
            } else if (++stall > tcfg.plateau_patience) {
                lr *= tcfg.plateau_factor;
                stall = 0;
            }
        }
    }
    result.model = std::move(model);
    return result;
}

}  // namespace ranwalk
