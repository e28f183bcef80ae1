#pragma once

#include "lstmrf/dataio.hpp"
#include "lstmrf/fusion.hpp"
#include "lstmrf/matrix.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lstmrf {

struct LstmConfig {
    int hidden_size = 32;
    int num_layers = 1;
    int input_size = 1; // scalar series on the univariate path
    double learning_rate = 0.005;
    int epochs = 100;
    std::uint64_t seed = 42;

    void validate() const; // throws ValidationError on nonsense values
};

/// One layer's gate parameters. Each weight matrix has shape
/// hidden x (hidden + input), row-major, applied to the concatenation
/// [h_prev, x]: columns [0, hidden) multiply h_prev, the rest multiply x.
struct LstmLayerParams {
    int input_size = 0;
    int hidden_size = 0;
    std::vector<double> w_forget, w_input, w_cell, w_output;
    std::vector<double> b_forget, b_input, b_cell, b_output;
};

/// Full parameter set: stacked gate layers plus the affine readout that maps
/// the top layer's final hidden state to a scalar prediction.
struct LstmParameters {
    LstmConfig config;
    std::vector<LstmLayerParams> layers;
    std::vector<double> proj_weight;
    double proj_bias = 0.0;

    /// Seeded init: weights uniform in +-1/sqrt(fan_in), biases zero except
    /// the forget-gate bias, which starts at 1.
    static LstmParameters init(const LstmConfig& config);

    bool all_finite() const;
};

/// Hidden and cell state for one layer.
struct LstmState {
    std::vector<double> hidden;
    std::vector<double> cell;

    explicit LstmState(int hidden_size = 0)
        : hidden(static_cast<std::size_t>(hidden_size), 0.0),
          cell(static_cast<std::size_t>(hidden_size), 0.0) {}
};

/// Per-step activation cache kept for backpropagation through time.
struct GateCache {
    std::vector<double> hx;     // [h_prev, x] concatenation
    std::vector<double> c_prev;
    std::vector<double> f, i, g, o; // gate outputs; g is the candidate cell
    std::vector<double> c, h;
};

/// One gated cell update (the recurrence the whole engine is built on):
///   f = sigmoid(W_f [h,x] + b_f)      i = sigmoid(W_i [h,x] + b_i)
///   g = tanh(W_c [h,x] + b_c)         o = sigmoid(W_o [h,x] + b_o)
///   c' = f*c + i*g                    h' = o * tanh(c')
/// Throws DivergenceError when any component comes out non-finite.
LstmState cell_step(const LstmLayerParams& layer, std::span<const double> x,
                    const LstmState& prev, GateCache* cache = nullptr);

/// Per-sample forward cache: gate activations for every layer and step.
struct ForwardTrace {
    std::vector<std::vector<GateCache>> steps; // [layer][t]
};

/// Runs the stacked cells over the window left to right (layer k's hidden
/// sequence is layer k+1's input) and applies the readout to the top layer's
/// final hidden state. Passing a trace enables an exact backward pass; the
/// trace buffers are reused across calls.
double forward(const LstmParameters& params, std::span<const double> window,
               ForwardTrace* trace = nullptr);

/// (1/N) * sum of squared errors.
double loss_mse(std::span<const double> predictions, std::span<const double> targets);

/// Gradient accumulator with the same tensor shapes as LstmParameters.
struct LstmGradients {
    std::vector<LstmLayerParams> layers;
    std::vector<double> proj_weight;
    double proj_bias = 0.0;

    static LstmGradients zeros_like(const LstmParameters& params);
    void add_scaled(const LstmGradients& other, double scale);
    double squared_norm() const;
    void scale(double factor);
    bool all_finite() const;
};

/// Accumulates d(loss)/d(params) for one sample into `grads`, given the
/// trace produced by forward() under the same parameters and the gradient
/// of the loss with respect to the sample's prediction.
void backward_sample(const LstmParameters& params, const ForwardTrace& trace,
                     double d_prediction, LstmGradients& grads);

/// Exact analytic gradients of batch-mean MSE over (windows, targets).
/// Optionally reports the batch loss evaluated at the current parameters.
LstmGradients backward(const LstmParameters& params, const DataMatrix& windows,
                       std::span<const double> targets, double* loss_out = nullptr);

struct LstmTrainReport {
    std::vector<double> loss_history; // pre-update batch loss, one per epoch
    std::size_t clip_events = 0;      // epochs whose gradient norm was clipped
};

/// Full-batch gradient descent with a constant learning rate. Gradients are
/// clipped to global norm 5 before each update. Deterministic given the
/// config seed. Throws DivergenceError (with the epoch index) when the loss
/// goes non-finite.
LstmParameters train_lstm(const LstmConfig& config, const DataMatrix& windows,
                          std::span<const double> targets_norm,
                          LstmTrainReport* report = nullptr);

LstmParameters train_lstm(const LstmConfig& config, const WindowedDataset& train_set,
                          LstmTrainReport* report = nullptr);

/// Per-window feature rows for the posterior regressor: the fusion mode's
/// columns, then the dataset's exogenous columns when the mode asks for them.
DataMatrix extract_features(const LstmParameters& params, const WindowedDataset& windows,
                            const FusionMode& mode);

/// Column labels matching extract_features' layout.
std::vector<std::string> feature_names(const FusionMode& mode, std::size_t window_len,
                                       int hidden_size, const std::vector<std::string>& exo_names);

} // namespace lstmrf
