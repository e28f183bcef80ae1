#include "lstmrf/commands.hpp"

#include "lstmrf/csv.hpp"
#include "lstmrf/errors.hpp"
#include "lstmrf/hybrid.hpp"
#include "lstmrf/serialize.hpp"
#include "lstmrf/tuner.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using nlohmann::json;

namespace lstmrf {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_resolved_config(const RunConfig& config) {
    save_json(config.to_json(), config.output_dir + "/resolved_config.json");
}

TimeSeries load_input(const RunConfig& config, LoadReport& report) {
    return load_series(config.input, config.target_column, config.date_column,
                       config.exo_columns, &report);
}

json eval_to_json(const EvalReport& eval) {
    json node{{"n", eval.n}, {"mse", eval.mse}, {"mae", eval.mae}, {"rmse", eval.rmse}};
    node["r2"] = eval.r2 ? json(*eval.r2) : json(nullptr);
    node["pearson"] = eval.pearson ? json(*eval.pearson) : json(nullptr);
    return node;
}

/// timestamp,partition,actual,predicted over every window, in window order.
void write_predictions_csv(const std::string& path, const TimeSeries& series,
                           std::size_t window_len, std::size_t train_count,
                           const std::vector<double>& actuals,
                           const std::vector<double>& predictions) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "timestamp,partition,actual,predicted\n";
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        out << series.timestamps[i + window_len] << ","
            << (i < train_count ? "train" : "test") << "," << csv::format_double(actuals[i])
            << "," << csv::format_double(predictions[i]) << "\n";
    }
    if (!out.good()) throw IoError("failed while writing " + path);
}

std::string format_metric_cell(const std::optional<double>& value) {
    if (!value) return "       n/a";
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%10.6f", *value);
    return buffer;
}

std::string format_metric_cell(double value) {
    return format_metric_cell(std::optional<double>(value));
}

void append_table_row(std::string& table, const std::string& model, const char* partition,
                      const EvalReport& eval) {
    char head[40];
    std::snprintf(head, sizeof(head), "%-12s %-9s", model.c_str(), partition);
    table += head;
    table += format_metric_cell(eval.mse) + " " + format_metric_cell(eval.mae) + " " +
             format_metric_cell(eval.rmse) + " " + format_metric_cell(eval.r2) + " " +
             format_metric_cell(eval.pearson) + "\n";
}

} // namespace

void cmd_train(const RunConfig& config) {
    config.validate();
    ensure_dir(config.output_dir);
    write_resolved_config(config);

    LoadReport load_report;
    TimeSeries series = load_input(config, load_report);

    HybridFitReport fit_report;
    HybridModel model = fit_hybrid(series, config.lstm, config.forest, config.fusion,
                                   config.window_len, config.train_fraction, &fit_report,
                                   config.threads);
    model.date_column = config.date_column;
    save_hybrid(model, config.output_dir + "/model.json");

    WindowedDataset windows =
        make_windows(series, config.window_len, model.target_norm, model.exo_norms);
    std::vector<double> predictions = predict_hybrid(model, windows);
    write_predictions_csv(config.output_dir + "/predictions.csv", series, config.window_len,
                          fit_report.train_count, windows.labels_orig, predictions);

    json importances = json::array();
    for (std::size_t f = 0; f < model.forest.feature_names.size(); ++f) {
        importances.push_back({{"feature", model.forest.feature_names[f]},
                               {"importance", model.forest.importances[f]}});
    }
    json report{{"input",
                 {{"rows_used", series.length()},
                  {"rows_dropped", load_report.rows_dropped},
                  {"duplicate_timestamps", load_report.duplicate_timestamps}}},
                {"partitions",
                 {{"window_count", fit_report.window_count},
                  {"train_count", fit_report.train_count},
                  {"test_count", fit_report.test_count}}},
                {"lstm",
                 {{"epochs", config.lstm.epochs},
                  {"clip_events", fit_report.lstm_train.clip_events},
                  {"final_loss", fit_report.lstm_train.loss_history.back()},
                  {"loss_history", fit_report.lstm_train.loss_history}}},
                {"metrics",
                 {{"train", eval_to_json(fit_report.train_eval)},
                  {"test", eval_to_json(fit_report.test_eval)}}},
                {"features", importances}};
    save_json(report, config.output_dir + "/report.json");
}

void cmd_predict(const std::string& model_path, const std::string& input_path,
                 std::size_t horizon, const std::string& output_dir) {
    HybridModel model = load_hybrid(model_path);
    TimeSeries series = load_series(input_path, model.target_column, model.date_column, {});
    if (series.length() < model.window_len) {
        throw ValidationError("input has " + std::to_string(series.length()) +
                              " usable rows, the model needs " +
                              std::to_string(model.window_len));
    }

    std::vector<double> forecasts = forecast_recursive(model, series.target, horizon);

    ensure_dir(output_dir);
    std::string path = output_dir + "/forecast.csv";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "step,predicted\n";
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        out << (i + 1) << "," << csv::format_double(forecasts[i]) << "\n";
    }
    if (!out.good()) throw IoError("failed while writing " + path);
}

void cmd_compare(const RunConfig& config) {
    config.validate();
    ensure_dir(config.output_dir);
    write_resolved_config(config);

    LoadReport load_report;
    TimeSeries series = load_input(config, load_report);

    HybridModel model;
    ComparisonReport report = run_baselines(series, config.lstm, config.forest, config.fusion,
                                            config.window_len, config.train_fraction, &model,
                                            config.threads);

    json doc{{"partitions",
              {{"window_count", report.window_count},
               {"train_count", report.train_count},
               {"test_count", report.test_count}}},
             {"note", "rf_only is trained directly on the normalized window values"},
             {"models", json::object()}};
    for (const ModelEval* eval : {&report.lstm_only, &report.rf_only, &report.hybrid}) {
        doc["models"][eval->name] = {{"train", eval_to_json(eval->train_eval)},
                                     {"test", eval_to_json(eval->test_eval)}};
    }
    save_json(doc, config.output_dir + "/comparison.json");

    std::string table = "model        partition        mse        mae       rmse         r2"
                        "    pearson\n";
    for (const ModelEval* eval : {&report.lstm_only, &report.rf_only, &report.hybrid}) {
        append_table_row(table, eval->name, "train", eval->train_eval);
        append_table_row(table, eval->name, "test", eval->test_eval);
    }
    {
        std::string path = config.output_dir + "/comparison.txt";
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path);
        out << table;
        if (!out.good()) throw IoError("failed while writing " + path);
    }

    WindowedDataset windows =
        make_windows(series, config.window_len, model.target_norm, model.exo_norms);
    for (const ModelEval* eval : {&report.lstm_only, &report.rf_only, &report.hybrid}) {
        write_predictions_csv(config.output_dir + "/predictions_" + eval->name + ".csv", series,
                              config.window_len, report.train_count, windows.labels_orig,
                              eval->predictions);
    }
}

void cmd_tune(const RunConfig& config) {
    config.validate();
    ensure_dir(config.output_dir);
    write_resolved_config(config);

    LoadReport load_report;
    TimeSeries series = load_input(config, load_report);

    std::vector<LstmTuneRow> lstm_rows =
        grid_search_lstm(series, config.lstm_grid, config.tune_epochs, config.train_fraction,
                         config.tune_seed, config.threads);
    write_lstm_grid_csv(lstm_rows, config.output_dir + "/tune_lstm.csv");

    const LstmTuneRow& best = lstm_rows.front();
    if (!best.score) {
        throw ValidationError("every LSTM combination failed; cannot stage the forest sweep");
    }

    // The forest sweep sees features from the winning LSTM, refit standalone
    // with its recorded sub-seed.
    LstmConfig best_cfg;
    best_cfg.hidden_size = best.hidden_size;
    best_cfg.num_layers = best.num_layers;
    best_cfg.learning_rate = best.learning_rate;
    best_cfg.epochs = config.tune_epochs;
    best_cfg.seed = best.seed;

    NormalizationParams target_norm = fit_normalizer(series);
    std::vector<NormalizationParams> exo_norms = fit_exo_normalizers(series);
    WindowedDataset windows = make_windows(series, best.sequence_len, target_norm, exo_norms);
    auto [train_set, test_set] = split_ordered(windows, config.train_fraction);
    LstmParameters lstm = train_lstm(best_cfg, train_set);
    DataMatrix features = extract_features(lstm, windows, config.fusion);

    std::vector<RfTuneRow> rf_rows =
        grid_search_rf(features, windows.labels_orig, config.rf_grid, config.train_fraction,
                       config.tune_seed, config.threads);
    write_rf_grid_csv(rf_rows, config.output_dir + "/tune_rf.csv");
}

void cmd_importance(const RunConfig& config) {
    config.validate();
    if (config.exo_columns.empty()) {
        throw ValidationError(
            "importance analysis needs exogenous columns; set data.exo_columns");
    }
    ensure_dir(config.output_dir);
    write_resolved_config(config);

    LoadReport load_report;
    TimeSeries series = load_input(config, load_report);

    // Same-day probe: how well do the exogenous readings explain the target?
    std::vector<NormalizationParams> exo_norms = fit_exo_normalizers(series);
    DataMatrix features(series.length(), series.exo_names.size());
    for (std::size_t i = 0; i < series.length(); ++i) {
        for (std::size_t j = 0; j < series.exo_names.size(); ++j) {
            features.at(i, j) = exo_norms[j].normalize(series.exogenous[j][i]);
        }
    }
    ForestModel forest = fit_forest(features, series.target, config.forest,
                                    TreeTask::Regression, series.exo_names, config.threads);
    write_importance_csv(forest, config.output_dir + "/importance.csv");
}

void cmd_synth(const SynthParams& params, const std::string& output_path) {
    fs::path parent = fs::path(output_path).parent_path();
    if (!parent.empty()) ensure_dir(parent.string());
    write_synth_csv(params, output_path);
}

} // namespace lstmrf
