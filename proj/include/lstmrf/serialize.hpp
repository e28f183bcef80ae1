#pragma once

#include "lstmrf/forest.hpp"
#include "lstmrf/hybrid.hpp"
#include "lstmrf/lstm.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace lstmrf {

/// Doubles travel through JSON as C99 hex-float strings ("0x1.5bf0a8b14p+1")
/// so every bit pattern — subnormals, -0, huge exponents — survives the
/// round-trip exactly. Plain decimal would be one rounding away from
/// breaking the reproducibility contract.
std::string double_to_hex(double v);
double double_from_hex(const std::string& text);

nlohmann::json doubles_to_json(const std::vector<double>& values);
std::vector<double> doubles_from_json(const nlohmann::json& node);

nlohmann::json lstm_to_json(const LstmParameters& params);
LstmParameters lstm_from_json(const nlohmann::json& node);

nlohmann::json forest_to_json(const ForestModel& model);
ForestModel forest_from_json(const nlohmann::json& node);

nlohmann::json hybrid_to_json(const HybridModel& model);
HybridModel hybrid_from_json(const nlohmann::json& node);

/// Writes a document with a trailing newline; 2-space indentation, keys
/// sorted by the underlying map, so equal documents are equal bytes.
void save_json(const nlohmann::json& doc, const std::string& path);
nlohmann::json load_json(const std::string& path);

void save_hybrid(const HybridModel& model, const std::string& path);
HybridModel load_hybrid(const std::string& path);

} // namespace lstmrf
