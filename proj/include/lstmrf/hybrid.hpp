#pragma once

#include "lstmrf/dataio.hpp"
#include "lstmrf/forest.hpp"
#include "lstmrf/fusion.hpp"
#include "lstmrf/lstm.hpp"
#include "lstmrf/metrics.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lstmrf {

/// The staged forecaster: an LSTM distills each window into features, a
/// random forest maps features to the next value in original units.
struct HybridModel {
    LstmParameters lstm;
    ForestModel forest;
    FusionMode fusion;
    std::size_t window_len = 0;
    NormalizationParams target_norm;
    std::vector<std::string> exo_names;
    std::vector<NormalizationParams> exo_norms;
    std::string target_column; // metadata so a saved model can check its inputs
    std::string date_column;

    std::size_t feature_dim() const { return forest.feature_count; }
};

struct HybridFitReport {
    std::size_t window_count = 0;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    LstmTrainReport lstm_train;
    EvalReport train_eval; // hybrid predictions vs labels_orig, train partition
    EvalReport test_eval;
};

/// Fits the staged pipeline in its canonical order: normalize the FULL
/// series, window it, split ordered, train the LSTM on normalized train
/// labels, extract features for ALL windows with the fitted LSTM, train the
/// forest on the train features against ORIGINAL-scale labels. Evaluation
/// in the report covers both partitions in original units.
HybridModel fit_hybrid(const TimeSeries& series, const LstmConfig& lstm_config,
                       const ForestConfig& forest_config, const FusionMode& fusion,
                       std::size_t window_len, double train_fraction,
                       HybridFitReport* report = nullptr, int threads = 1);

/// Original-scale predictions for windows prepared with the model's own
/// normalizer. Rejects a dataset whose window length or normalization
/// parameters (compared bitwise) differ from those recorded at fit time.
std::vector<double> predict_hybrid(const HybridModel& model, const WindowedDataset& windows);

/// Multi-step rollout: predict one step, append the normalized prediction
/// to the window, slide, repeat. `tail_original` is the series tail in
/// original units, length >= window_len. Fusion modes that consume exogenous
/// columns are rejected (future exogenous values are unknown).
std::vector<double> forecast_recursive(const HybridModel& model,
                                       std::span<const double> tail_original,
                                       std::size_t horizon);

/// One model's predictions over every window plus per-partition metrics.
struct ModelEval {
    std::string name;
    std::vector<double> predictions; // all windows, original scale
    EvalReport train_eval;
    EvalReport test_eval;
};

struct ComparisonReport {
    std::size_t window_count = 0;
    std::size_t train_count = 0;
    std::size_t test_count = 0;
    ModelEval lstm_only;
    ModelEval rf_only;
    ModelEval hybrid;
};

/// Head-to-head of the three models on the identical ordered split. The
/// LSTM is trained once and reused (alone, and as the hybrid's feature
/// stage); the standalone forest is trained directly on the normalized
/// window values. All predictions and metrics are in original units.
/// When `hybrid_out` is given, the fitted hybrid model is copied there.
ComparisonReport run_baselines(const TimeSeries& series, const LstmConfig& lstm_config,
                               const ForestConfig& forest_config, const FusionMode& fusion,
                               std::size_t window_len, double train_fraction,
                               HybridModel* hybrid_out = nullptr, int threads = 1);

} // namespace lstmrf
