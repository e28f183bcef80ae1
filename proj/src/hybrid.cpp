#include "lstmrf/hybrid.hpp"

#include "lstmrf/errors.hpp"

#include <cstring>
#include <string>

namespace lstmrf {

namespace {

bool same_bits(double a, double b) {
    return std::memcmp(&a, &b, sizeof(double)) == 0;
}

/// Feature row for one raw normalized window, mirroring extract_features'
/// column layout for the exogenous-free modes (the rollout path).
std::vector<double> feature_row(const HybridModel& model, std::span<const double> window_norm,
                                ForwardTrace& trace) {
    double pred = forward(model.lstm, window_norm, &trace);
    const std::vector<double>& h_final = trace.steps.back().back().h;
    std::vector<double> row;
    switch (model.fusion.kind) {
    case FusionKind::Pred:
        row.push_back(pred);
        break;
    case FusionKind::Hidden:
        row = h_final;
        break;
    case FusionKind::Splice:
        row.assign(window_norm.begin(), window_norm.end());
        row.insert(row.end(), h_final.begin(), h_final.end());
        break;
    }
    return row;
}

void evaluate_partitions(const std::vector<double>& predictions,
                         const std::vector<double>& labels_orig, std::size_t train_count,
                         EvalReport& train_eval, EvalReport& test_eval) {
    std::span<const double> pred(predictions);
    std::span<const double> labels(labels_orig);
    train_eval = evaluate(labels.subspan(0, train_count), pred.subspan(0, train_count));
    test_eval = evaluate(labels.subspan(train_count), pred.subspan(train_count));
}

} // namespace

HybridModel fit_hybrid(const TimeSeries& series, const LstmConfig& lstm_config,
                       const ForestConfig& forest_config, const FusionMode& fusion,
                       std::size_t window_len, double train_fraction, HybridFitReport* report,
                       int threads) {
    if (fusion.include_exogenous && series.exo_names.empty()) {
        throw ValidationError("fusion mode requires exogenous columns, none configured");
    }

    NormalizationParams target_norm = fit_normalizer(series);
    std::vector<NormalizationParams> exo_norms = fit_exo_normalizers(series);
    WindowedDataset windows = make_windows(series, window_len, target_norm, exo_norms);
    auto [train_set, test_set] = split_ordered(windows, train_fraction);

    HybridModel model;
    model.fusion = fusion;
    model.window_len = window_len;
    model.target_norm = target_norm;
    model.exo_names = series.exo_names;
    model.exo_norms = exo_norms;
    model.target_column = series.name;

    HybridFitReport local;
    HybridFitReport& rep = report ? *report : local;
    rep.window_count = windows.size();
    rep.train_count = train_set.size();
    rep.test_count = test_set.size();

    LstmConfig lstm_cfg = lstm_config;
    lstm_cfg.input_size = 1;
    model.lstm = train_lstm(lstm_cfg, train_set, &rep.lstm_train);

    DataMatrix train_features = extract_features(model.lstm, train_set, fusion);
    std::vector<std::string> names =
        feature_names(fusion, window_len, lstm_cfg.hidden_size, series.exo_names);
    model.forest = fit_forest(train_features, train_set.labels_orig, forest_config,
                              TreeTask::Regression, names, threads);

    std::vector<double> predictions = predict_hybrid(model, windows);
    evaluate_partitions(predictions, windows.labels_orig, rep.train_count, rep.train_eval,
                        rep.test_eval);
    return model;
}

std::vector<double> predict_hybrid(const HybridModel& model, const WindowedDataset& windows) {
    if (windows.window_len != model.window_len) {
        throw ValidationError("window length " + std::to_string(windows.window_len) +
                              " does not match the model's " + std::to_string(model.window_len));
    }
    if (!same_bits(windows.target_norm.mu, model.target_norm.mu) ||
        !same_bits(windows.target_norm.sigma, model.target_norm.sigma)) {
        throw ValidationError(
            "windows were normalized with different parameters than the model was fit with");
    }
    DataMatrix features = extract_features(model.lstm, windows, model.fusion);
    if (features.cols != model.forest.feature_count) {
        throw ValidationError("feature dimension " + std::to_string(features.cols) +
                              " does not match the forest's " +
                              std::to_string(model.forest.feature_count));
    }
    return predict_regression(model.forest, features);
}

std::vector<double> forecast_recursive(const HybridModel& model,
                                       std::span<const double> tail_original,
                                       std::size_t horizon) {
    if (horizon < 1) throw ValidationError("horizon must be >= 1");
    if (model.fusion.include_exogenous) {
        throw ValidationError(
            "recursive forecasting is unsupported with exogenous fusion features "
            "(future exogenous values are unknown)");
    }
    if (tail_original.size() < model.window_len) {
        throw ValidationError("need at least " + std::to_string(model.window_len) +
                              " trailing values, got " + std::to_string(tail_original.size()));
    }

    std::vector<double> window(tail_original.end() - static_cast<std::ptrdiff_t>(model.window_len),
                               tail_original.end());
    for (double& v : window) v = model.target_norm.normalize(v);

    std::vector<double> forecasts;
    forecasts.reserve(horizon);
    ForwardTrace trace;
    for (std::size_t step = 0; step < horizon; ++step) {
        std::vector<double> row = feature_row(model, window, trace);
        double y = predict_regression(model.forest, row);
        forecasts.push_back(y);
        window.erase(window.begin());
        window.push_back(model.target_norm.normalize(y));
    }
    return forecasts;
}

ComparisonReport run_baselines(const TimeSeries& series, const LstmConfig& lstm_config,
                               const ForestConfig& forest_config, const FusionMode& fusion,
                               std::size_t window_len, double train_fraction,
                               HybridModel* hybrid_out, int threads) {
    HybridFitReport fit_report;
    HybridModel model = fit_hybrid(series, lstm_config, forest_config, fusion, window_len,
                                   train_fraction, &fit_report, threads);

    NormalizationParams target_norm = model.target_norm;
    WindowedDataset windows = make_windows(series, window_len, target_norm, model.exo_norms);
    auto [train_set, test_set] = split_ordered(windows, train_fraction);

    ComparisonReport report;
    report.window_count = fit_report.window_count;
    report.train_count = fit_report.train_count;
    report.test_count = fit_report.test_count;

    // LSTM alone: its normalized predictions mapped back to original units.
    report.lstm_only.name = "lstm_only";
    {
        std::vector<double>& pred = report.lstm_only.predictions;
        pred.reserve(windows.size());
        ForwardTrace trace;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            pred.push_back(target_norm.denormalize(forward(model.lstm, windows.inputs.row(i), &trace)));
        }
        evaluate_partitions(pred, windows.labels_orig, report.train_count,
                            report.lstm_only.train_eval, report.lstm_only.test_eval);
    }

    // Forest alone: trained straight on the normalized window values.
    report.rf_only.name = "rf_only";
    {
        std::vector<std::string> names;
        for (std::size_t k = 0; k < window_len; ++k) names.push_back("w" + std::to_string(k));
        ForestModel rf = fit_forest(train_set.inputs, train_set.labels_orig, forest_config,
                                    TreeTask::Regression, names, threads);
        report.rf_only.predictions = predict_regression(rf, windows.inputs);
        evaluate_partitions(report.rf_only.predictions, windows.labels_orig, report.train_count,
                            report.rf_only.train_eval, report.rf_only.test_eval);
    }

    report.hybrid.name = "hybrid";
    report.hybrid.predictions = predict_hybrid(model, windows);
    report.hybrid.train_eval = fit_report.train_eval;
    report.hybrid.test_eval = fit_report.test_eval;

    if (hybrid_out) *hybrid_out = std::move(model);
    return report;
}

} // namespace lstmrf
