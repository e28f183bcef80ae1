#include "lstmrf/run_config.hpp"

#include "lstmrf/errors.hpp"
#include "lstmrf/serialize.hpp"

#include <cstdlib>
#include <set>
#include <string>

using nlohmann::json;

namespace lstmrf {

namespace {

void check_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) {
        throw ValidationError("config: '" + path + "' must be an object");
    }
    for (const auto& item : obj.items()) {
        if (!allowed.contains(item.key())) {
            throw ValidationError("config: unknown key '" + path + item.key() + "'");
        }
    }
}

template <typename T>
void read(const json& obj, const std::string& path, const char* key, T& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config: '" + path + key + "' has the wrong type");
    }
}

/// max_depth accepts a positive integer or the string "none" (unbounded).
void read_depth(const json& obj, const std::string& path, const char* key, int& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (it->is_string()) {
        if (it->get<std::string>() != "none") {
            throw ValidationError("config: '" + path + key + "' must be an integer or \"none\"");
        }
        out = kUnbounded;
        return;
    }
    read(obj, path, key, out);
}

/// max_features accepts a positive count, "auto" (d/3) or "all".
void read_features(const json& obj, const std::string& path, const char* key, int& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (it->is_string()) {
        std::string v = it->get<std::string>();
        if (v == "auto") {
            out = kAutoFeatures;
        } else if (v == "all") {
            out = kAllFeatures;
        } else {
            throw ValidationError("config: '" + path + key +
                                  "' must be a count, \"auto\" or \"all\"");
        }
        return;
    }
    read(obj, path, key, out);
    if (out <= 0) {
        throw ValidationError("config: '" + path + key + "' count must be positive");
    }
}

json depth_to_json(int depth) {
    if (depth == kUnbounded) return "none";
    return depth;
}

json features_to_json(int features) {
    if (features == kAutoFeatures) return "auto";
    if (features == kAllFeatures) return "all";
    return features;
}

} // namespace

RunConfig RunConfig::from_json(const json& doc) {
    RunConfig cfg;
    check_keys(doc, "", {"data", "lstm", "forest", "hybrid", "tune", "output"});

    if (doc.contains("data")) {
        const json& data = doc["data"];
        check_keys(data, "data.", {"input", "target_column", "date_column", "exo_columns",
                                   "window_len", "train_fraction"});
        read(data, "data.", "input", cfg.input);
        read(data, "data.", "target_column", cfg.target_column);
        read(data, "data.", "date_column", cfg.date_column);
        read(data, "data.", "exo_columns", cfg.exo_columns);
        read(data, "data.", "window_len", cfg.window_len);
        read(data, "data.", "train_fraction", cfg.train_fraction);
    }
    if (doc.contains("lstm")) {
        const json& lstm = doc["lstm"];
        check_keys(lstm, "lstm.", {"hidden_size", "num_layers", "learning_rate", "epochs", "seed"});
        read(lstm, "lstm.", "hidden_size", cfg.lstm.hidden_size);
        read(lstm, "lstm.", "num_layers", cfg.lstm.num_layers);
        read(lstm, "lstm.", "learning_rate", cfg.lstm.learning_rate);
        read(lstm, "lstm.", "epochs", cfg.lstm.epochs);
        read(lstm, "lstm.", "seed", cfg.lstm.seed);
    }
    if (doc.contains("forest")) {
        const json& forest = doc["forest"];
        check_keys(forest, "forest.", {"num_trees", "max_depth", "min_samples_split",
                                       "max_features", "bootstrap", "seed"});
        read(forest, "forest.", "num_trees", cfg.forest.num_trees);
        read_depth(forest, "forest.", "max_depth", cfg.forest.max_depth);
        read(forest, "forest.", "min_samples_split", cfg.forest.min_samples_split);
        read_features(forest, "forest.", "max_features", cfg.forest.max_features);
        read(forest, "forest.", "bootstrap", cfg.forest.bootstrap);
        read(forest, "forest.", "seed", cfg.forest.seed);
    }
    if (doc.contains("hybrid")) {
        const json& hybrid = doc["hybrid"];
        check_keys(hybrid, "hybrid.", {"fusion", "include_exogenous"});
        std::string fusion = to_string(cfg.fusion.kind);
        read(hybrid, "hybrid.", "fusion", fusion);
        cfg.fusion.kind = fusion_kind_from_string(fusion);
        read(hybrid, "hybrid.", "include_exogenous", cfg.fusion.include_exogenous);
    }
    if (doc.contains("tune")) {
        const json& tune = doc["tune"];
        check_keys(tune, "tune.", {"seed", "epochs", "lstm", "rf"});
        read(tune, "tune.", "seed", cfg.tune_seed);
        read(tune, "tune.", "epochs", cfg.tune_epochs);
        if (tune.contains("lstm")) {
            const json& grid = tune["lstm"];
            check_keys(grid, "tune.lstm.",
                       {"hidden_sizes", "num_layers", "learning_rates", "sequence_lens"});
            read(grid, "tune.lstm.", "hidden_sizes", cfg.lstm_grid.hidden_sizes);
            read(grid, "tune.lstm.", "num_layers", cfg.lstm_grid.num_layers);
            read(grid, "tune.lstm.", "learning_rates", cfg.lstm_grid.learning_rates);
            read(grid, "tune.lstm.", "sequence_lens", cfg.lstm_grid.sequence_lens);
        }
        if (tune.contains("rf")) {
            const json& grid = tune["rf"];
            check_keys(grid, "tune.rf.", {"num_trees", "max_depths", "min_samples_splits"});
            read(grid, "tune.rf.", "num_trees", cfg.rf_grid.num_trees);
            if (grid.contains("max_depths")) {
                const json& depths = grid["max_depths"];
                if (!depths.is_array()) {
                    throw ValidationError("config: 'tune.rf.max_depths' must be an array");
                }
                cfg.rf_grid.max_depths.clear();
                for (const auto& d : depths) {
                    int depth = 0;
                    if (d.is_string()) {
                        if (d.get<std::string>() != "none") {
                            throw ValidationError(
                                "config: 'tune.rf.max_depths' entries must be integers or \"none\"");
                        }
                        depth = kUnbounded;
                    } else if (d.is_number_integer()) {
                        depth = d.get<int>();
                    } else {
                        throw ValidationError(
                            "config: 'tune.rf.max_depths' entries must be integers or \"none\"");
                    }
                    cfg.rf_grid.max_depths.push_back(depth);
                }
            }
            read(grid, "tune.rf.", "min_samples_splits", cfg.rf_grid.min_samples_splits);
        }
    }
    if (doc.contains("output")) {
        const json& output = doc["output"];
        check_keys(output, "output.", {"dir"});
        read(output, "output.", "dir", cfg.output_dir);
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    json doc;
    try {
        doc = load_json(path);
    } catch (const SerializationError& e) {
        // A config the user wrote is input validation, not artifact decoding.
        throw ValidationError(e.what());
    }
    return from_json(doc);
}

json RunConfig::to_json() const {
    json depths = json::array();
    for (int d : rf_grid.max_depths) depths.push_back(depth_to_json(d));
    return json{
        {"data",
         {{"input", input},
          {"target_column", target_column},
          {"date_column", date_column},
          {"exo_columns", exo_columns},
          {"window_len", window_len},
          {"train_fraction", train_fraction}}},
        {"lstm",
         {{"hidden_size", lstm.hidden_size},
          {"num_layers", lstm.num_layers},
          {"learning_rate", lstm.learning_rate},
          {"epochs", lstm.epochs},
          {"seed", lstm.seed}}},
        {"forest",
         {{"num_trees", forest.num_trees},
          {"max_depth", depth_to_json(forest.max_depth)},
          {"min_samples_split", forest.min_samples_split},
          {"max_features", features_to_json(forest.max_features)},
          {"bootstrap", forest.bootstrap},
          {"seed", forest.seed}}},
        {"hybrid",
         {{"fusion", to_string(fusion.kind)}, {"include_exogenous", fusion.include_exogenous}}},
        {"tune",
         {{"seed", tune_seed},
          {"epochs", tune_epochs},
          {"lstm",
           {{"hidden_sizes", lstm_grid.hidden_sizes},
            {"num_layers", lstm_grid.num_layers},
            {"learning_rates", lstm_grid.learning_rates},
            {"sequence_lens", lstm_grid.sequence_lens}}},
          {"rf",
           {{"num_trees", rf_grid.num_trees},
            {"max_depths", depths},
            {"min_samples_splits", rf_grid.min_samples_splits}}}}},
        {"output", {{"dir", output_dir}}}};
}

void RunConfig::apply_env() {
    if (const char* seed_text = std::getenv("LSTMRF_SEED")) {
        char* end = nullptr;
        unsigned long long seed = std::strtoull(seed_text, &end, 10);
        if (end == seed_text || *end != '\0') {
            throw ValidationError("LSTMRF_SEED must be an unsigned integer");
        }
        lstm.seed = seed;
        forest.seed = seed;
        tune_seed = seed;
    }
    if (const char* threads_text = std::getenv("LSTMRF_THREADS")) {
        char* end = nullptr;
        long count = std::strtol(threads_text, &end, 10);
        if (end == threads_text || *end != '\0' || count < 1) {
            throw ValidationError("LSTMRF_THREADS must be a positive integer");
        }
        threads = static_cast<int>(count);
    }
}

void RunConfig::validate() const {
    if (input.empty()) throw ValidationError("config: data.input is required");
    if (target_column.empty()) throw ValidationError("config: data.target_column is required");
    if (date_column.empty()) throw ValidationError("config: data.date_column is required");
    if (window_len < 1) throw ValidationError("config: data.window_len must be >= 1");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("config: data.train_fraction must be in (0, 1)");
    }
    lstm.validate();
    forest.validate();
    if (fusion.include_exogenous && exo_columns.empty()) {
        throw ValidationError(
            "config: hybrid.include_exogenous requires data.exo_columns to be set");
    }
    lstm_grid.validate();
    rf_grid.validate();
    if (tune_epochs < 1) throw ValidationError("config: tune.epochs must be >= 1");
    if (threads < 1) throw ValidationError("threads must be >= 1");
}

} // namespace lstmrf
