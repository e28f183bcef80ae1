#pragma once

#include "lstmrf/run_config.hpp"
#include "lstmrf/synth.hpp"

#include <string>

namespace lstmrf {

/// Batch workflows behind the CLI verbs. Each writes its outputs (plus a
/// resolved copy of the config) into config.output_dir and throws an
/// lstmrf::Error on failure; the CLI maps categories to exit codes.

/// Fits the hybrid pipeline; writes model.json, report.json,
/// predictions.csv and resolved_config.json.
void cmd_train(const RunConfig& config);

/// Loads a saved model, reads the series named in the model's metadata from
/// input_path, rolls the forecast `horizon` steps past the end of the data
/// and writes forecast.csv (step, predicted) in original units.
void cmd_predict(const std::string& model_path, const std::string& input_path,
                 std::size_t horizon, const std::string& output_dir);

/// LSTM-only vs forest-only vs hybrid on the identical split; writes
/// comparison.json, comparison.txt and one predictions CSV per model.
void cmd_compare(const RunConfig& config);

/// Exhaustive sweeps: the LSTM grid over the raw series, then the forest
/// grid over features extracted with the best LSTM configuration. Writes
/// tune_lstm.csv and tune_rf.csv.
void cmd_tune(const RunConfig& config);

/// Forest importance of the exogenous columns for the same-day target;
/// writes importance.csv sorted descending. Requires data.exo_columns.
void cmd_importance(const RunConfig& config);

/// Writes the documented synthetic fixture CSV to output_path.
void cmd_synth(const SynthParams& params, const std::string& output_path);

} // namespace lstmrf
