#include "lstmrf/lstm.hpp"

#include "lstmrf/errors.hpp"
#include "lstmrf/rng.hpp"

#include <cmath>
#include <cstddef>
#include <string>

namespace lstmrf {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_window_shape(const LstmParameters& params, std::size_t window_len) {
    if (window_len < 1) {
        throw ValidationError("window must contain at least 1 value");
    }
    if (params.layers.empty()) {
        throw ValidationError("uninitialized parameters");
    }
    (void)window_len;
}

// z = W [h_prev, x] + b for one gate, row-major W of shape hidden x (hidden+input).
inline void gate_preactivation(const std::vector<double>& w, const std::vector<double>& b,
                               const std::vector<double>& hx, int hidden, int width,
                               std::vector<double>& z) {
    z.resize(static_cast<std::size_t>(hidden));
    const double* wp = w.data();
    for (int j = 0; j < hidden; ++j) {
        double acc = b[static_cast<std::size_t>(j)];
        const double* row = wp + static_cast<std::size_t>(j) * static_cast<std::size_t>(width);
        for (int k = 0; k < width; ++k) {
            acc += row[k] * hx[static_cast<std::size_t>(k)];
        }
        z[static_cast<std::size_t>(j)] = acc;
    }
}

void cell_step_into(const LstmLayerParams& layer, std::span<const double> x,
                    const std::vector<double>& h_prev, const std::vector<double>& c_prev,
                    GateCache& cache) {
    const int hidden = layer.hidden_size;
    const int width = layer.hidden_size + layer.input_size;
    if (static_cast<int>(x.size()) != layer.input_size) {
        throw ValidationError("cell input size " + std::to_string(x.size()) +
                              " does not match layer input size " +
                              std::to_string(layer.input_size));
    }

    cache.hx.resize(static_cast<std::size_t>(width));
    std::copy(h_prev.begin(), h_prev.end(), cache.hx.begin());
    std::copy(x.begin(), x.end(), cache.hx.begin() + hidden);
    cache.c_prev = c_prev;

    gate_preactivation(layer.w_forget, layer.b_forget, cache.hx, hidden, width, cache.f);
    gate_preactivation(layer.w_input, layer.b_input, cache.hx, hidden, width, cache.i);
    gate_preactivation(layer.w_cell, layer.b_cell, cache.hx, hidden, width, cache.g);
    gate_preactivation(layer.w_output, layer.b_output, cache.hx, hidden, width, cache.o);

    cache.c.resize(static_cast<std::size_t>(hidden));
    cache.h.resize(static_cast<std::size_t>(hidden));
    for (int j = 0; j < hidden; ++j) {
        auto ju = static_cast<std::size_t>(j);
        cache.f[ju] = sigmoid(cache.f[ju]);
        cache.i[ju] = sigmoid(cache.i[ju]);
        cache.g[ju] = std::tanh(cache.g[ju]);
        cache.o[ju] = sigmoid(cache.o[ju]);
        cache.c[ju] = cache.f[ju] * c_prev[ju] + cache.i[ju] * cache.g[ju];
        cache.h[ju] = cache.o[ju] * std::tanh(cache.c[ju]);
        if (!std::isfinite(cache.c[ju]) || !std::isfinite(cache.h[ju])) {
            throw DivergenceError("non-finite cell state (exploding weights)");
        }
    }
}

} // namespace

void LstmConfig::validate() const {
    if (hidden_size < 1) throw ValidationError("hidden_size must be >= 1");
    if (num_layers < 1) throw ValidationError("num_layers must be >= 1");
    if (input_size < 1) throw ValidationError("input_size must be >= 1");
    if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (epochs < 1) throw ValidationError("epochs must be >= 1");
}

LstmParameters LstmParameters::init(const LstmConfig& config) {
    config.validate();
    LstmParameters params;
    params.config = config;
    Rng rng(config.seed);

    for (int layer = 0; layer < config.num_layers; ++layer) {
        LstmLayerParams p;
        p.input_size = (layer == 0) ? config.input_size : config.hidden_size;
        p.hidden_size = config.hidden_size;
        int width = p.input_size + p.hidden_size;
        double bound = 1.0 / std::sqrt(static_cast<double>(width));
        auto tensor = static_cast<std::size_t>(config.hidden_size) * static_cast<std::size_t>(width);
        for (auto* w : {&p.w_forget, &p.w_input, &p.w_cell, &p.w_output}) {
            w->resize(tensor);
            for (auto& v : *w) v = rng.next_uniform(-bound, bound);
        }
        auto h = static_cast<std::size_t>(config.hidden_size);
        p.b_forget.assign(h, 1.0); // eases early memory retention
        p.b_input.assign(h, 0.0);
        p.b_cell.assign(h, 0.0);
        p.b_output.assign(h, 0.0);
        params.layers.push_back(std::move(p));
    }

    double bound = 1.0 / std::sqrt(static_cast<double>(config.hidden_size));
    params.proj_weight.resize(static_cast<std::size_t>(config.hidden_size));
    for (auto& v : params.proj_weight) v = rng.next_uniform(-bound, bound);
    params.proj_bias = 0.0;
    return params;
}

bool LstmParameters::all_finite() const {
    auto ok = [](const std::vector<double>& v) {
        for (double x : v) {
            if (!std::isfinite(x)) return false;
        }
        return true;
    };
    for (const auto& layer : layers) {
        if (!ok(layer.w_forget) || !ok(layer.w_input) || !ok(layer.w_cell) ||
            !ok(layer.w_output) || !ok(layer.b_forget) || !ok(layer.b_input) ||
            !ok(layer.b_cell) || !ok(layer.b_output)) {
            return false;
        }
    }
    return ok(proj_weight) && std::isfinite(proj_bias);
}

LstmState cell_step(const LstmLayerParams& layer, std::span<const double> x,
                    const LstmState& prev, GateCache* cache) {
    GateCache local;
    GateCache& c = cache ? *cache : local;
    cell_step_into(layer, x, prev.hidden, prev.cell, c);
    LstmState next(layer.hidden_size);
    next.hidden = c.h;
    next.cell = c.c;
    return next;
}

double forward(const LstmParameters& params, std::span<const double> window,
               ForwardTrace* trace) {
    check_window_shape(params, window.size());
    const auto num_layers = params.layers.size();
    const std::size_t len = window.size();

    ForwardTrace local;
    ForwardTrace& tr = trace ? *trace : local;
    tr.steps.resize(num_layers);
    for (auto& s : tr.steps) s.resize(len);

    for (std::size_t layer = 0; layer < num_layers; ++layer) {
        const LstmLayerParams& p = params.layers[layer];
        auto h = static_cast<std::size_t>(p.hidden_size);
        std::vector<double> h_prev(h, 0.0), c_prev(h, 0.0);
        for (std::size_t t = 0; t < len; ++t) {
            GateCache& cache = tr.steps[layer][t];
            if (layer == 0) {
                cell_step_into(p, std::span<const double>(&window[t], 1), h_prev, c_prev, cache);
            } else {
                const std::vector<double>& below = tr.steps[layer - 1][t].h;
                cell_step_into(p, below, h_prev, c_prev, cache);
            }
            h_prev = cache.h;
            c_prev = cache.c;
        }
    }

    const std::vector<double>& h_final = tr.steps[num_layers - 1][len - 1].h;
    double pred = params.proj_bias;
    for (std::size_t j = 0; j < h_final.size(); ++j) {
        pred += params.proj_weight[j] * h_final[j];
    }
    if (!std::isfinite(pred)) {
        throw DivergenceError("non-finite prediction");
    }
    return pred;
}

double loss_mse(std::span<const double> predictions, std::span<const double> targets) {
    if (predictions.size() != targets.size()) {
        throw ValidationError("loss_mse length mismatch");
    }
    if (predictions.empty()) {
        throw ValidationError("loss_mse on empty input");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double d = predictions[i] - targets[i];
        acc += d * d;
    }
    return acc / static_cast<double>(predictions.size());
}

LstmGradients LstmGradients::zeros_like(const LstmParameters& params) {
    LstmGradients g;
    g.layers.reserve(params.layers.size());
    for (const auto& layer : params.layers) {
        LstmLayerParams z;
        z.input_size = layer.input_size;
        z.hidden_size = layer.hidden_size;
        z.w_forget.assign(layer.w_forget.size(), 0.0);
        z.w_input.assign(layer.w_input.size(), 0.0);
        z.w_cell.assign(layer.w_cell.size(), 0.0);
        z.w_output.assign(layer.w_output.size(), 0.0);
        z.b_forget.assign(layer.b_forget.size(), 0.0);
        z.b_input.assign(layer.b_input.size(), 0.0);
        z.b_cell.assign(layer.b_cell.size(), 0.0);
        z.b_output.assign(layer.b_output.size(), 0.0);
        g.layers.push_back(std::move(z));
    }
    g.proj_weight.assign(params.proj_weight.size(), 0.0);
    g.proj_bias = 0.0;
    return g;
}

namespace {

template <typename Fn>
void for_each_tensor(LstmGradients& g, Fn&& fn) {
    for (auto& layer : g.layers) {
        fn(layer.w_forget);
        fn(layer.w_input);
        fn(layer.w_cell);
        fn(layer.w_output);
        fn(layer.b_forget);
        fn(layer.b_input);
        fn(layer.b_cell);
        fn(layer.b_output);
    }
    fn(g.proj_weight);
}

template <typename Fn>
void for_each_tensor(const LstmGradients& g, Fn&& fn) {
    for (const auto& layer : g.layers) {
        fn(layer.w_forget);
        fn(layer.w_input);
        fn(layer.w_cell);
        fn(layer.w_output);
        fn(layer.b_forget);
        fn(layer.b_input);
        fn(layer.b_cell);
        fn(layer.b_output);
    }
    fn(g.proj_weight);
}

} // namespace

void LstmGradients::add_scaled(const LstmGradients& other, double s) {
    for (std::size_t l = 0; l < layers.size(); ++l) {
        auto axpy = [s](std::vector<double>& dst, const std::vector<double>& src) {
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += s * src[k];
        };
        axpy(layers[l].w_forget, other.layers[l].w_forget);
        axpy(layers[l].w_input, other.layers[l].w_input);
        axpy(layers[l].w_cell, other.layers[l].w_cell);
        axpy(layers[l].w_output, other.layers[l].w_output);
        axpy(layers[l].b_forget, other.layers[l].b_forget);
        axpy(layers[l].b_input, other.layers[l].b_input);
        axpy(layers[l].b_cell, other.layers[l].b_cell);
        axpy(layers[l].b_output, other.layers[l].b_output);
    }
    for (std::size_t k = 0; k < proj_weight.size(); ++k) {
        proj_weight[k] += s * other.proj_weight[k];
    }
    proj_bias += s * other.proj_bias;
}

double LstmGradients::squared_norm() const {
    double acc = 0.0;
    for_each_tensor(*this, [&acc](const std::vector<double>& v) {
        for (double x : v) acc += x * x;
    });
    return acc + proj_bias * proj_bias;
}

void LstmGradients::scale(double factor) {
    for_each_tensor(*this, [factor](std::vector<double>& v) {
        for (double& x : v) x *= factor;
    });
    proj_bias *= factor;
}

bool LstmGradients::all_finite() const {
    bool ok = std::isfinite(proj_bias);
    for_each_tensor(*this, [&ok](const std::vector<double>& v) {
        for (double x : v) {
            if (!std::isfinite(x)) ok = false;
        }
    });
    return ok;
}

// Reverse-mode pass over the cached recurrence. For each step, with dh the
// total gradient reaching h_t and dc the carry reaching c_t:
//   do = dh * tanh(c)              dzo = do * o(1-o)
//   dc += dh * o * (1 - tanh^2 c)
//   df = dc * c_prev               dzf = df * f(1-f)
//   di = dc * g                    dzi = di * i(1-i)
//   dg = dc * i                    dzc = dg * (1-g^2)
//   d[h_prev,x] = sum_G W_G^T dzG; carry_dc = dc * f
void backward_sample(const LstmParameters& params, const ForwardTrace& trace,
                     double d_prediction, LstmGradients& grads) {
    const auto num_layers = params.layers.size();
    if (trace.steps.size() != num_layers || trace.steps.empty() || trace.steps[0].empty()) {
        throw ValidationError("trace does not match parameters");
    }
    const std::size_t len = trace.steps[0].size();

    // Gradient reaching each step's hidden output from outside the layer:
    // the readout for the top layer, the layer above's input gradient below.
    std::vector<std::vector<double>> upstream(len);
    {
        const std::vector<double>& h_final = trace.steps[num_layers - 1][len - 1].h;
        for (std::size_t t = 0; t < len; ++t) {
            upstream[t].assign(static_cast<std::size_t>(params.config.hidden_size), 0.0);
        }
        for (std::size_t j = 0; j < h_final.size(); ++j) {
            upstream[len - 1][j] = d_prediction * params.proj_weight[j];
            grads.proj_weight[j] += d_prediction * h_final[j];
        }
        grads.proj_bias += d_prediction;
    }

    std::vector<std::vector<double>> downstream(len);

    for (std::size_t li = num_layers; li-- > 0;) {
        const LstmLayerParams& p = params.layers[li];
        LstmLayerParams& g = grads.layers[li];
        const int hidden = p.hidden_size;
        const int width = p.hidden_size + p.input_size;
        auto hu = static_cast<std::size_t>(hidden);

        for (std::size_t t = 0; t < len; ++t) {
            downstream[t].assign(static_cast<std::size_t>(p.input_size), 0.0);
        }

        std::vector<double> carry_dh(hu, 0.0), carry_dc(hu, 0.0);
        std::vector<double> dzf(hu), dzi(hu), dzc(hu), dzo(hu), dhx(static_cast<std::size_t>(width));

        for (std::size_t t = len; t-- > 0;) {
            const GateCache& cache = trace.steps[li][t];
            for (std::size_t j = 0; j < hu; ++j) {
                double dh = upstream[t][j] + carry_dh[j];
                double tanh_c = std::tanh(cache.c[j]);
                double dc = carry_dc[j] + dh * cache.o[j] * (1.0 - tanh_c * tanh_c);
                double dob = dh * tanh_c;
                dzo[j] = dob * cache.o[j] * (1.0 - cache.o[j]);
                double df = dc * cache.c_prev[j];
                dzf[j] = df * cache.f[j] * (1.0 - cache.f[j]);
                double di = dc * cache.g[j];
                dzi[j] = di * cache.i[j] * (1.0 - cache.i[j]);
                double dg = dc * cache.i[j];
                dzc[j] = dg * (1.0 - cache.g[j] * cache.g[j]);
                carry_dc[j] = dc * cache.f[j];
            }

            std::fill(dhx.begin(), dhx.end(), 0.0);
            auto accumulate_gate = [&](const std::vector<double>& w, std::vector<double>& wg,
                                       std::vector<double>& bg, const std::vector<double>& dz) {
                for (int j = 0; j < hidden; ++j) {
                    auto ju = static_cast<std::size_t>(j);
                    double dzj = dz[ju];
                    bg[ju] += dzj;
                    const double* row = w.data() + ju * static_cast<std::size_t>(width);
                    double* grow = wg.data() + ju * static_cast<std::size_t>(width);
                    for (int k = 0; k < width; ++k) {
                        auto ku = static_cast<std::size_t>(k);
                        grow[ku] += dzj * cache.hx[ku];
                        dhx[ku] += dzj * row[ku];
                    }
                }
            };
            accumulate_gate(p.w_forget, g.w_forget, g.b_forget, dzf);
            accumulate_gate(p.w_input, g.w_input, g.b_input, dzi);
            accumulate_gate(p.w_cell, g.w_cell, g.b_cell, dzc);
            accumulate_gate(p.w_output, g.w_output, g.b_output, dzo);

            std::copy(dhx.begin(), dhx.begin() + hidden, carry_dh.begin());
            std::copy(dhx.begin() + hidden, dhx.end(), downstream[t].begin());
        }

        if (li > 0) {
            upstream.swap(downstream);
        }
    }
}

LstmGradients backward(const LstmParameters& params, const DataMatrix& windows,
                       std::span<const double> targets, double* loss_out) {
    if (windows.rows != targets.size()) {
        throw ValidationError("window count does not match target count");
    }
    if (windows.rows == 0) {
        throw ValidationError("empty batch");
    }
    LstmGradients grads = LstmGradients::zeros_like(params);
    ForwardTrace trace;
    double loss_acc = 0.0;
    const double inv_n = 1.0 / static_cast<double>(windows.rows);
    for (std::size_t s = 0; s < windows.rows; ++s) {
        double pred = forward(params, windows.row(s), &trace);
        double diff = pred - targets[s];
        loss_acc += diff * diff;
        backward_sample(params, trace, 2.0 * diff * inv_n, grads);
    }
    if (!grads.all_finite()) {
        throw DivergenceError("non-finite gradient");
    }
    if (loss_out) *loss_out = loss_acc * inv_n;
    return grads;
}

LstmParameters train_lstm(const LstmConfig& config, const DataMatrix& windows,
                          std::span<const double> targets_norm, LstmTrainReport* report) {
    config.validate();
    if (windows.rows == 0) {
        throw ValidationError("training set is empty");
    }
    if (static_cast<int>(windows.cols) < 1) {
        throw ValidationError("training windows are empty");
    }

    LstmParameters params = LstmParameters::init(config);
    LstmTrainReport local;
    LstmTrainReport& rep = report ? *report : local;
    rep.loss_history.clear();
    rep.clip_events = 0;

    constexpr double kClipNorm = 5.0;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        double loss = 0.0;
        LstmGradients grads = backward(params, windows, targets_norm, &loss);
        if (!std::isfinite(loss)) {
            throw DivergenceError("training diverged at epoch " + std::to_string(epoch));
        }
        rep.loss_history.push_back(loss);

        double norm = std::sqrt(grads.squared_norm());
        if (norm > kClipNorm) {
            grads.scale(kClipNorm / norm);
            ++rep.clip_events;
        }

        // params -= lr * grads
        for (std::size_t l = 0; l < params.layers.size(); ++l) {
            auto step = [&](std::vector<double>& dst, const std::vector<double>& g) {
                for (std::size_t k = 0; k < dst.size(); ++k) {
                    dst[k] -= config.learning_rate * g[k];
                }
            };
            step(params.layers[l].w_forget, grads.layers[l].w_forget);
            step(params.layers[l].w_input, grads.layers[l].w_input);
            step(params.layers[l].w_cell, grads.layers[l].w_cell);
            step(params.layers[l].w_output, grads.layers[l].w_output);
            step(params.layers[l].b_forget, grads.layers[l].b_forget);
            step(params.layers[l].b_input, grads.layers[l].b_input);
            step(params.layers[l].b_cell, grads.layers[l].b_cell);
            step(params.layers[l].b_output, grads.layers[l].b_output);
        }
        for (std::size_t k = 0; k < params.proj_weight.size(); ++k) {
            params.proj_weight[k] -= config.learning_rate * grads.proj_weight[k];
        }
        params.proj_bias -= config.learning_rate * grads.proj_bias;

        if (!params.all_finite()) {
            throw DivergenceError("parameters diverged at epoch " + std::to_string(epoch));
        }
    }
    return params;
}

LstmParameters train_lstm(const LstmConfig& config, const WindowedDataset& train_set,
                          LstmTrainReport* report) {
    return train_lstm(config, train_set.inputs, train_set.labels_norm, report);
}

DataMatrix extract_features(const LstmParameters& params, const WindowedDataset& windows,
                            const FusionMode& mode) {
    if (mode.include_exogenous && !windows.has_exogenous()) {
        throw ValidationError("fusion mode requires exogenous columns, dataset has none");
    }
    const std::size_t n = windows.size();
    const std::size_t len = windows.window_len;
    const auto d_h = static_cast<std::size_t>(params.config.hidden_size);
    const std::size_t n_exo = mode.include_exogenous ? windows.exo_rows.cols : 0;

    std::size_t base_cols = 0;
    switch (mode.kind) {
    case FusionKind::Pred: base_cols = 1; break;
    case FusionKind::Hidden: base_cols = d_h; break;
    case FusionKind::Splice: base_cols = len + d_h; break;
    }

    DataMatrix features(n, base_cols + n_exo);
    ForwardTrace trace;
    for (std::size_t i = 0; i < n; ++i) {
        double pred = forward(params, windows.inputs.row(i), &trace);
        const std::vector<double>& h_final = trace.steps.back().back().h;
        std::size_t col = 0;
        switch (mode.kind) {
        case FusionKind::Pred:
            features.at(i, col++) = pred;
            break;
        case FusionKind::Hidden:
            for (std::size_t j = 0; j < d_h; ++j) features.at(i, col++) = h_final[j];
            break;
        case FusionKind::Splice:
            for (std::size_t k = 0; k < len; ++k) features.at(i, col++) = windows.inputs.at(i, k);
            for (std::size_t j = 0; j < d_h; ++j) features.at(i, col++) = h_final[j];
            break;
        }
        for (std::size_t j = 0; j < n_exo; ++j) {
            features.at(i, col++) = windows.exo_rows.at(i, j);
        }
    }
    return features;
}

std::vector<std::string> feature_names(const FusionMode& mode, std::size_t window_len,
                                       int hidden_size,
                                       const std::vector<std::string>& exo_names) {
    std::vector<std::string> names;
    switch (mode.kind) {
    case FusionKind::Pred:
        names.emplace_back("lstm_pred");
        break;
    case FusionKind::Hidden:
        for (int j = 0; j < hidden_size; ++j) names.push_back("h" + std::to_string(j));
        break;
    case FusionKind::Splice:
        for (std::size_t k = 0; k < window_len; ++k) names.push_back("w" + std::to_string(k));
        for (int j = 0; j < hidden_size; ++j) names.push_back("h" + std::to_string(j));
        break;
    }
    if (mode.include_exogenous) {
        names.insert(names.end(), exo_names.begin(), exo_names.end());
    }
    return names;
}

const char* to_string(FusionKind kind) {
    switch (kind) {
    case FusionKind::Pred: return "pred";
    case FusionKind::Hidden: return "hidden";
    case FusionKind::Splice: return "splice";
    }
    return "pred";
}

FusionKind fusion_kind_from_string(const std::string& name) {
    if (name == "pred") return FusionKind::Pred;
    if (name == "hidden") return FusionKind::Hidden;
    if (name == "splice") return FusionKind::Splice;
    throw ValidationError("unknown fusion mode: '" + name + "' (pred|hidden|splice)");
}

} // namespace lstmrf
