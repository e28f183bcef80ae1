#include "lstmrf/cli.hpp"

#include "lstmrf/commands.hpp"
#include "lstmrf/errors.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>

namespace lstmrf {

namespace {

/// Flag overrides shared by the config-driven commands. Precedence is
/// config file < environment < flag.
struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> output_dir;
    std::optional<std::string> input;
};

void add_common_options(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("-c,--config", opts.config_path, "Run configuration (JSON)")->required();
    cmd->add_option("--seed", opts.seed, "Override every seed in the config");
    cmd->add_option("--threads", opts.threads, "Worker thread cap");
    cmd->add_option("-o,--output", opts.output_dir, "Override output.dir");
    cmd->add_option("-i,--input", opts.input, "Override data.input");
}

RunConfig resolve_config(const CommonOptions& opts) {
    RunConfig config = RunConfig::from_file(opts.config_path);
    config.apply_env();
    if (opts.seed) {
        config.lstm.seed = *opts.seed;
        config.forest.seed = *opts.seed;
        config.tune_seed = *opts.seed;
    }
    if (opts.threads) config.threads = *opts.threads;
    if (opts.output_dir) config.output_dir = *opts.output_dir;
    if (opts.input) config.input = *opts.input;
    config.validate();
    return config;
}

} // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"hybrid LSTM + random-forest time-series forecaster"};
    app.name("lstmrf");
    app.require_subcommand(1);

    CommonOptions train_opts, compare_opts, tune_opts, importance_opts;
    CLI::App* train = app.add_subcommand("train", "Fit the hybrid pipeline and save the model");
    add_common_options(train, train_opts);
    CLI::App* compare =
        app.add_subcommand("compare", "Evaluate LSTM-only, forest-only and hybrid head to head");
    add_common_options(compare, compare_opts);
    CLI::App* tune = app.add_subcommand("tune", "Exhaustive hyperparameter grid sweeps");
    add_common_options(tune, tune_opts);
    CLI::App* importance =
        app.add_subcommand("importance", "Forest importance of the exogenous columns");
    add_common_options(importance, importance_opts);

    std::string model_path, predict_input, predict_output = "out";
    std::size_t horizon = 1;
    CLI::App* predict = app.add_subcommand("predict", "Roll a saved model past the end of a series");
    predict->add_option("-m,--model", model_path, "Saved model (JSON)")->required();
    predict->add_option("-i,--input", predict_input, "Series CSV")->required();
    predict->add_option("-n,--horizon", horizon, "Steps to forecast")->check(CLI::PositiveNumber);
    predict->add_option("-o,--output", predict_output, "Output directory");

    SynthParams synth_params;
    std::string synth_output = "synthetic.csv";
    CLI::App* synth = app.add_subcommand("synth", "Write the documented synthetic fixture CSV");
    synth->add_option("-o,--output", synth_output, "Output CSV path");
    synth->add_option("--length", synth_params.length, "Number of daily rows");
    synth->add_option("--seed", synth_params.seed, "Generator seed");
    synth->add_option("--noise-sigma", synth_params.noise_sigma, "Target noise scale");
    synth->add_option("--coupling-nitrite", synth_params.coupling_nitrite,
                      "Nonlinear driver strength");
    synth->add_option("--coupling-temp", synth_params.coupling_temp, "Linear driver strength");
    synth->add_option("--start-date", synth_params.start_date, "First date (YYYY-MM-DD)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 3; // bad usage is a validation failure
    }

    try {
        if (train->parsed()) {
            cmd_train(resolve_config(train_opts));
        } else if (compare->parsed()) {
            cmd_compare(resolve_config(compare_opts));
        } else if (tune->parsed()) {
            cmd_tune(resolve_config(tune_opts));
        } else if (importance->parsed()) {
            cmd_importance(resolve_config(importance_opts));
        } else if (predict->parsed()) {
            cmd_predict(model_path, predict_input, horizon, predict_output);
        } else if (synth->parsed()) {
            cmd_synth(synth_params, synth_output);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "lstmrf: error [%s]: %s\n", e.category_name(), e.what());
        return e.exit_code();
    } catch (const std::exception& e) {
        std::fprintf(stderr, "lstmrf: error [internal]: %s\n", e.what());
        return 1;
    }
    return 0;
}

} // namespace lstmrf
