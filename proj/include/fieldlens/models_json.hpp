#pragma once

#include <nlohmann/json.hpp>

#include "fieldlens/models.hpp"

namespace fieldlens::models {

nlohmann::ordered_json entry_to_json(const ModelRegistryEntry& entry);
Result<ModelRegistryEntry> entry_from_json(const nlohmann::ordered_json& row);

}  // namespace fieldlens::models
