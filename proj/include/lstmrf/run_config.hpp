#pragma once

#include "lstmrf/forest.hpp"
#include "lstmrf/fusion.hpp"
#include "lstmrf/lstm.hpp"
#include "lstmrf/tuner.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace lstmrf {

/// One declarative document drives every command. Key namespaces: data.*,
/// lstm.*, forest.*, hybrid.*, tune.*, output.*. Unknown keys anywhere are
/// rejected (typo safety), and a fully resolved copy — every default
/// materialized — is written next to the outputs of each run.
struct RunConfig {
    // data.*
    std::string input;
    std::string target_column = "target";
    std::string date_column = "date";
    std::vector<std::string> exo_columns;
    std::size_t window_len = 30;
    double train_fraction = 0.8;

    // lstm.* / forest.* / hybrid.*
    LstmConfig lstm;
    ForestConfig forest;
    FusionMode fusion;

    // tune.*
    LstmGrid lstm_grid;
    RfGrid rf_grid;
    int tune_epochs = 30;
    std::uint64_t tune_seed = 42;

    // output.*
    std::string output_dir = "out";

    // Not a config key: set by --threads or LSTMRF_THREADS.
    int threads = 1;

    static RunConfig from_json(const nlohmann::json& doc);
    static RunConfig from_file(const std::string& path);

    /// Resolved document with every default filled in.
    nlohmann::json to_json() const;

    /// LSTMRF_SEED replaces all three seeds; LSTMRF_THREADS the worker cap.
    void apply_env();

    void validate() const;
};

} // namespace lstmrf
