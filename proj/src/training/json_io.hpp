#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "fieldlens/training.hpp"

namespace fieldlens::training::detail {

nlohmann::ordered_json split_to_json(const dataset::SplitResult& split);
dataset::SplitResult split_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const TrainingConfig& config);
Result<TrainingConfig> config_from_json(const nlohmann::ordered_json& j);

Result<void> write_file(const std::filesystem::path& path, const std::string& bytes);
Result<std::string> read_file(const std::filesystem::path& path);

}  // namespace fieldlens::training::detail
