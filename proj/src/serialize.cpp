#include "lstmrf/serialize.hpp"

#include "lstmrf/errors.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

using nlohmann::json;

namespace lstmrf {

namespace {

constexpr const char* kHybridFormat = "lstmrf.hybrid";
constexpr int kHybridVersion = 1;

/// json::at with the library's exceptions rewritten into our taxonomy.
const json& field(const json& node, const char* key) {
    auto it = node.find(key);
    if (it == node.end()) {
        throw SerializationError(std::string("missing field '") + key + "'");
    }
    return *it;
}

template <typename T>
T field_as(const json& node, const char* key) {
    try {
        return field(node, key).get<T>();
    } catch (const json::exception& e) {
        throw SerializationError(std::string("field '") + key + "': " + e.what());
    }
}

} // namespace

std::string double_to_hex(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%a", v);
    return buffer;
}

double double_from_hex(const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end != begin + text.size() || text.empty()) {
        throw SerializationError("malformed numeric literal '" + text + "'");
    }
    return v;
}

json doubles_to_json(const std::vector<double>& values) {
    json arr = json::array();
    for (double v : values) arr.push_back(double_to_hex(v));
    return arr;
}

std::vector<double> doubles_from_json(const json& node) {
    if (!node.is_array()) throw SerializationError("expected an array of numeric strings");
    std::vector<double> values;
    values.reserve(node.size());
    for (const auto& item : node) {
        if (!item.is_string()) throw SerializationError("expected a numeric string");
        values.push_back(double_from_hex(item.get<std::string>()));
    }
    return values;
}

namespace {

json norm_to_json(const NormalizationParams& params) {
    return json{{"mu", double_to_hex(params.mu)}, {"sigma", double_to_hex(params.sigma)}};
}

NormalizationParams norm_from_json(const json& node) {
    NormalizationParams params;
    params.mu = double_from_hex(field_as<std::string>(node, "mu"));
    params.sigma = double_from_hex(field_as<std::string>(node, "sigma"));
    return params;
}

} // namespace

json lstm_to_json(const LstmParameters& params) {
    json doc;
    doc["config"] = {{"hidden_size", params.config.hidden_size},
                     {"num_layers", params.config.num_layers},
                     {"input_size", params.config.input_size},
                     {"learning_rate", double_to_hex(params.config.learning_rate)},
                     {"epochs", params.config.epochs},
                     {"seed", params.config.seed}};
    json layers = json::array();
    for (const auto& layer : params.layers) {
        layers.push_back({{"input_size", layer.input_size},
                          {"hidden_size", layer.hidden_size},
                          {"w_forget", doubles_to_json(layer.w_forget)},
                          {"w_input", doubles_to_json(layer.w_input)},
                          {"w_cell", doubles_to_json(layer.w_cell)},
                          {"w_output", doubles_to_json(layer.w_output)},
                          {"b_forget", doubles_to_json(layer.b_forget)},
                          {"b_input", doubles_to_json(layer.b_input)},
                          {"b_cell", doubles_to_json(layer.b_cell)},
                          {"b_output", doubles_to_json(layer.b_output)}});
    }
    doc["layers"] = std::move(layers);
    doc["proj_weight"] = doubles_to_json(params.proj_weight);
    doc["proj_bias"] = double_to_hex(params.proj_bias);
    return doc;
}

LstmParameters lstm_from_json(const json& node) {
    LstmParameters params;
    const json& cfg = field(node, "config");
    params.config.hidden_size = field_as<int>(cfg, "hidden_size");
    params.config.num_layers = field_as<int>(cfg, "num_layers");
    params.config.input_size = field_as<int>(cfg, "input_size");
    params.config.learning_rate = double_from_hex(field_as<std::string>(cfg, "learning_rate"));
    params.config.epochs = field_as<int>(cfg, "epochs");
    params.config.seed = field_as<std::uint64_t>(cfg, "seed");

    const json& layers = field(node, "layers");
    if (!layers.is_array()) throw SerializationError("'layers' must be an array");
    for (const auto& item : layers) {
        LstmLayerParams layer;
        layer.input_size = field_as<int>(item, "input_size");
        layer.hidden_size = field_as<int>(item, "hidden_size");
        layer.w_forget = doubles_from_json(field(item, "w_forget"));
        layer.w_input = doubles_from_json(field(item, "w_input"));
        layer.w_cell = doubles_from_json(field(item, "w_cell"));
        layer.w_output = doubles_from_json(field(item, "w_output"));
        layer.b_forget = doubles_from_json(field(item, "b_forget"));
        layer.b_input = doubles_from_json(field(item, "b_input"));
        layer.b_cell = doubles_from_json(field(item, "b_cell"));
        layer.b_output = doubles_from_json(field(item, "b_output"));

        auto expected = static_cast<std::size_t>(layer.hidden_size) *
                        static_cast<std::size_t>(layer.hidden_size + layer.input_size);
        for (const auto* w : {&layer.w_forget, &layer.w_input, &layer.w_cell, &layer.w_output}) {
            if (w->size() != expected) throw SerializationError("gate weight shape mismatch");
        }
        for (const auto* b : {&layer.b_forget, &layer.b_input, &layer.b_cell, &layer.b_output}) {
            if (b->size() != static_cast<std::size_t>(layer.hidden_size)) {
                throw SerializationError("gate bias shape mismatch");
            }
        }
        params.layers.push_back(std::move(layer));
    }
    if (params.layers.size() != static_cast<std::size_t>(params.config.num_layers)) {
        throw SerializationError("layer count does not match config");
    }

    params.proj_weight = doubles_from_json(field(node, "proj_weight"));
    if (params.proj_weight.size() != static_cast<std::size_t>(params.config.hidden_size)) {
        throw SerializationError("projection weight shape mismatch");
    }
    params.proj_bias = double_from_hex(field_as<std::string>(node, "proj_bias"));
    return params;
}

json forest_to_json(const ForestModel& model) {
    json doc;
    doc["config"] = {{"num_trees", model.config.num_trees},
                     {"max_depth", model.config.max_depth},
                     {"min_samples_split", model.config.min_samples_split},
                     {"max_features", model.config.max_features},
                     {"bootstrap", model.config.bootstrap},
                     {"seed", model.config.seed}};
    doc["task"] = model.task == TreeTask::Regression ? "regression" : "classification";
    doc["feature_count"] = model.feature_count;
    doc["feature_names"] = model.feature_names;
    doc["importances"] = doubles_to_json(model.importances);

    // Trees as columnar preorder arrays: compact, and trivially bit-exact.
    json trees = json::array();
    for (const Tree& tree : model.trees) {
        json t;
        json feature = json::array(), threshold = json::array(), value = json::array(),
             decrease = json::array(), samples = json::array(), left = json::array(),
             right = json::array();
        for (const TreeNode& node : tree.nodes) {
            feature.push_back(node.feature);
            threshold.push_back(double_to_hex(node.threshold));
            value.push_back(double_to_hex(node.value));
            decrease.push_back(double_to_hex(node.decrease));
            samples.push_back(node.samples);
            left.push_back(node.left);
            right.push_back(node.right);
        }
        t["feature"] = std::move(feature);
        t["threshold"] = std::move(threshold);
        t["value"] = std::move(value);
        t["decrease"] = std::move(decrease);
        t["samples"] = std::move(samples);
        t["left"] = std::move(left);
        t["right"] = std::move(right);
        trees.push_back(std::move(t));
    }
    doc["trees"] = std::move(trees);
    return doc;
}

ForestModel forest_from_json(const json& node) {
    ForestModel model;
    const json& cfg = field(node, "config");
    model.config.num_trees = field_as<int>(cfg, "num_trees");
    model.config.max_depth = field_as<int>(cfg, "max_depth");
    model.config.min_samples_split = field_as<int>(cfg, "min_samples_split");
    model.config.max_features = field_as<int>(cfg, "max_features");
    model.config.bootstrap = field_as<bool>(cfg, "bootstrap");
    model.config.seed = field_as<std::uint64_t>(cfg, "seed");

    std::string task = field_as<std::string>(node, "task");
    if (task == "regression") {
        model.task = TreeTask::Regression;
    } else if (task == "classification") {
        model.task = TreeTask::Classification;
    } else {
        throw SerializationError("unknown task '" + task + "'");
    }

    model.feature_count = field_as<std::size_t>(node, "feature_count");
    model.feature_names = field_as<std::vector<std::string>>(node, "feature_names");
    model.importances = doubles_from_json(field(node, "importances"));

    const json& trees = field(node, "trees");
    if (!trees.is_array()) throw SerializationError("'trees' must be an array");
    for (const auto& t : trees) {
        auto feature = field_as<std::vector<int>>(t, "feature");
        auto threshold = doubles_from_json(field(t, "threshold"));
        auto value = doubles_from_json(field(t, "value"));
        auto decrease = doubles_from_json(field(t, "decrease"));
        auto samples = field_as<std::vector<std::size_t>>(t, "samples");
        auto left = field_as<std::vector<int>>(t, "left");
        auto right = field_as<std::vector<int>>(t, "right");

        std::size_t n = feature.size();
        if (threshold.size() != n || value.size() != n || decrease.size() != n ||
            samples.size() != n || left.size() != n || right.size() != n || n == 0) {
            throw SerializationError("tree arrays disagree on node count");
        }
        Tree tree;
        tree.nodes.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            TreeNode& tn = tree.nodes[i];
            tn.feature = feature[i];
            tn.threshold = threshold[i];
            tn.value = value[i];
            tn.decrease = decrease[i];
            tn.samples = samples[i];
            tn.left = left[i];
            tn.right = right[i];
            if (tn.feature >= 0) {
                bool bad_child = tn.left < 0 || tn.right < 0 ||
                                 static_cast<std::size_t>(tn.left) >= n ||
                                 static_cast<std::size_t>(tn.right) >= n;
                if (bad_child || static_cast<std::size_t>(tn.feature) >= model.feature_count) {
                    throw SerializationError("tree node references are out of range");
                }
            }
        }
        model.trees.push_back(std::move(tree));
    }
    if (model.trees.size() != static_cast<std::size_t>(model.config.num_trees)) {
        throw SerializationError("tree count does not match config");
    }
    return model;
}

json hybrid_to_json(const HybridModel& model) {
    json doc;
    doc["format"] = kHybridFormat;
    doc["version"] = kHybridVersion;
    doc["lstm"] = lstm_to_json(model.lstm);
    doc["forest"] = forest_to_json(model.forest);
    doc["fusion"] = {{"kind", to_string(model.fusion.kind)},
                     {"include_exogenous", model.fusion.include_exogenous}};
    doc["window_len"] = model.window_len;
    doc["target_norm"] = norm_to_json(model.target_norm);
    doc["exo_names"] = model.exo_names;
    json exo_norms = json::array();
    for (const auto& p : model.exo_norms) exo_norms.push_back(norm_to_json(p));
    doc["exo_norms"] = std::move(exo_norms);
    doc["target_column"] = model.target_column;
    doc["date_column"] = model.date_column;
    return doc;
}

HybridModel hybrid_from_json(const json& node) {
    std::string format = field_as<std::string>(node, "format");
    if (format != kHybridFormat) {
        throw SerializationError("not a hybrid model file (format '" + format + "')");
    }
    int version = field_as<int>(node, "version");
    if (version != kHybridVersion) {
        throw SerializationError("unsupported model version " + std::to_string(version));
    }

    HybridModel model;
    model.lstm = lstm_from_json(field(node, "lstm"));
    model.forest = forest_from_json(field(node, "forest"));
    const json& fusion = field(node, "fusion");
    model.fusion.kind = fusion_kind_from_string(field_as<std::string>(fusion, "kind"));
    model.fusion.include_exogenous = field_as<bool>(fusion, "include_exogenous");
    model.window_len = field_as<std::size_t>(node, "window_len");
    model.target_norm = norm_from_json(field(node, "target_norm"));
    model.exo_names = field_as<std::vector<std::string>>(node, "exo_names");
    for (const auto& p : field(node, "exo_norms")) model.exo_norms.push_back(norm_from_json(p));
    model.target_column = field_as<std::string>(node, "target_column");
    model.date_column = field_as<std::string>(node, "date_column");

    if (model.exo_norms.size() != model.exo_names.size()) {
        throw SerializationError("exogenous normalizer count does not match names");
    }
    return model;
}

void save_json(const json& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << doc.dump(2) << "\n";
    if (!out.good()) throw IoError("failed while writing " + path);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SerializationError(path + ": " + e.what());
    }
}

void save_hybrid(const HybridModel& model, const std::string& path) {
    save_json(hybrid_to_json(model), path);
}

HybridModel load_hybrid(const std::string& path) {
    json doc = load_json(path);
    try {
        return hybrid_from_json(doc);
    } catch (const json::exception& e) {
        throw SerializationError(path + ": " + e.what());
    }
}

} // namespace lstmrf
