#pragma once

#include <nlohmann/json.hpp>

#include "obj2text/metrics.hpp"
#include "obj2text/model.hpp"
#include "obj2text/training.hpp"

namespace obj2text {

void to_json(nlohmann::json& j, const AblationFlags& flags);
void from_json(const nlohmann::json& j, AblationFlags& flags);

void to_json(nlohmann::json& j, const MetricReport& report);

void to_json(nlohmann::json& j, const HistoryEntry& entry);

/// Every field is written, so the output reloads to an identical config.
void to_json(nlohmann::json& j, const TrainConfig& config);

/// Reads a (possibly partial) config. An optional "preset" key selects the
/// base values that the remaining keys override. Unknown keys and wrongly
/// typed values throw ConfigError.
TrainConfig parse_train_config(const nlohmann::json& j);

}  // namespace obj2text
