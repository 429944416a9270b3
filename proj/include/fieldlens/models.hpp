#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fieldlens/domain.hpp"
#include "fieldlens/result.hpp"

namespace fieldlens::models {

enum class ModelTask { detection, classification, segmentation };

std::string_view to_string(ModelTask task);
std::optional<ModelTask> parse_model_task(std::string_view text);
ModelTask model_task(domain::Task task);

struct ModelRegistryEntry {
    std::string name;
    double inference_ms = 0;
    double map_coco = 0;
    double size_mb = 0;
    ModelTask task = ModelTask::detection;
    std::optional<std::size_t> class_capacity{};
    /// Observed to run steadily on test phones; informational only.
    std::optional<bool> stable_on_device{};

    bool operator==(const ModelRegistryEntry&) const = default;
};

struct SelectionConstraints {
    std::optional<double> max_inference_ms{};
    std::optional<double> max_size_mb{};
    std::optional<double> min_map{};
    ModelTask task = ModelTask::detection;
    std::size_t num_classes = 1;
};

struct ModelSelection {
    ModelRegistryEntry entry;
    std::vector<std::string> notes;
};

/// The six benchmarked mobile detectors.
const std::vector<ModelRegistryEntry>& default_registry();

/// Environment variable naming a registry file that replaces the defaults.
inline constexpr const char* kRegistryEnv = "FIELDLENS_REGISTRY";

Result<std::vector<ModelRegistryEntry>> parse_registry(std::string_view json_text);
Result<std::vector<ModelRegistryEntry>> load_registry(const std::filesystem::path& path);
/// File named by FIELDLENS_REGISTRY when set, otherwise the defaults.
Result<std::vector<ModelRegistryEntry>> registry_from_environment();
std::string registry_json(const std::vector<ModelRegistryEntry>& registry);

Result<void> validate_entry(const ModelRegistryEntry& entry);

/// Highest mAP among entries meeting every constraint; ties go to lower
/// latency, then smaller size, then name.
Result<ModelSelection> select_model(const std::vector<ModelRegistryEntry>& registry, const SelectionConstraints& c);

Result<void> check_class_capacity(const ModelRegistryEntry& entry, std::size_t num_classes);

const ModelRegistryEntry* find_model(const std::vector<ModelRegistryEntry>& registry, std::string_view name);

}  // namespace fieldlens::models
