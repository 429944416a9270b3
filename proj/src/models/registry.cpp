#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fieldlens/models_json.hpp"
#include "fieldlens/text.hpp"

namespace fieldlens::models {

using nlohmann::ordered_json;

std::string_view to_string(ModelTask task) {
    switch (task) {
        case ModelTask::detection: return "detection";
        case ModelTask::classification: return "classification";
        case ModelTask::segmentation: return "segmentation";
    }
    return "detection";
}

std::optional<ModelTask> parse_model_task(std::string_view text) {
    auto key = fold_key(text);
    if (key == "detection") return ModelTask::detection;
    if (key == "classification") return ModelTask::classification;
    if (key == "segmentation") return ModelTask::segmentation;
    return std::nullopt;
}

ModelTask model_task(domain::Task task) {
    return task == domain::Task::classification ? ModelTask::classification : ModelTask::detection;
}

const std::vector<ModelRegistryEntry>& default_registry() {
    static const std::vector<ModelRegistryEntry> rows = {
        {"SSD MobileNet v1", 48, 29.1, 5, ModelTask::detection, std::nullopt, std::nullopt},
        {"SSD MobileNet v2", 39, 28.2, 5, ModelTask::detection, std::nullopt, std::nullopt},
        {"EfficientDet D0", 39, 33.6, 6, ModelTask::detection, 999, std::nullopt},
        {"EfficientDet D1", 54, 38.4, 8, ModelTask::detection, 999, std::nullopt},
        {"EfficientDet D2", 67, 41.8, 11, ModelTask::detection, 999, true},
        {"YOLOv8m", 32, 50.2, 49, ModelTask::detection, std::nullopt, false},
    };
    return rows;
}

Result<void> validate_entry(const ModelRegistryEntry& e) {
    auto bad = [&](const std::string& what) {
        return make_error(ErrorCode::InvalidRegistry, "'" + e.name + "': " + what);
    };
    if (trim(e.name).empty()) return make_error(ErrorCode::InvalidRegistry, "entry without a name");
    if (!std::isfinite(e.inference_ms) || e.inference_ms <= 0) return bad("inference_ms must be positive");
    if (!std::isfinite(e.map_coco) || e.map_coco <= 0 || e.map_coco > 100) return bad("map_coco must be in (0, 100]");
    if (!std::isfinite(e.size_mb) || e.size_mb <= 0) return bad("size_mb must be positive");
    if (e.class_capacity && *e.class_capacity == 0) return bad("class_capacity must be positive");
    return {};
}

Result<ModelRegistryEntry> entry_from_json(const ordered_json& row) {
    ModelRegistryEntry e;
    try {
        e.name = row.at("name").get<std::string>();
        e.inference_ms = row.at("inference_ms").get<double>();
        e.map_coco = row.at("map_coco").get<double>();
        e.size_mb = row.at("size_mb").get<double>();
        auto task = parse_model_task(row.at("task").get<std::string>());
        if (!task) return make_error(ErrorCode::InvalidRegistry, "'" + e.name + "': unknown task");
        e.task = *task;
        if (auto it = row.find("class_capacity"); it != row.end() && !it->is_null()) {
            if (!it->is_number_integer() || it->get<long long>() <= 0)
                return make_error(ErrorCode::InvalidRegistry, "'" + e.name + "': class_capacity must be a positive integer");
            e.class_capacity = it->get<std::size_t>();
        }
        if (auto it = row.find("stable_on_device"); it != row.end() && !it->is_null())
            e.stable_on_device = it->get<bool>();
    } catch (const nlohmann::json::exception& ex) {
        return make_error(ErrorCode::InvalidRegistry, ex.what());
    }
    if (auto ok = validate_entry(e); !ok) return ok.error();
    return e;
}

ordered_json entry_to_json(const ModelRegistryEntry& e) {
    ordered_json row;
    row["name"] = e.name;
    row["inference_ms"] = e.inference_ms;
    row["map_coco"] = e.map_coco;
    row["size_mb"] = e.size_mb;
    row["task"] = to_string(e.task);
    row["class_capacity"] = e.class_capacity ? ordered_json(*e.class_capacity) : ordered_json(nullptr);
    if (e.stable_on_device) row["stable_on_device"] = *e.stable_on_device;
    return row;
}

Result<std::vector<ModelRegistryEntry>> parse_registry(std::string_view text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        return make_error(ErrorCode::InvalidRegistry, e.what());
    }
    if (!j.is_array()) return make_error(ErrorCode::InvalidRegistry, "registry must be a JSON array");
    std::vector<ModelRegistryEntry> out;
    for (const auto& row : j) {
        auto e = entry_from_json(row);
        if (!e) return e.error();
        for (const auto& prev : out)
            if (fold_key(prev.name) == fold_key(e->name))
                return make_error(ErrorCode::InvalidRegistry, "duplicate model '" + e->name + "'");
        out.push_back(std::move(*e));
    }
    if (out.empty()) return make_error(ErrorCode::InvalidRegistry, "registry is empty");
    return out;
}

Result<std::vector<ModelRegistryEntry>> load_registry(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return make_error(ErrorCode::IoError, "cannot read registry " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_registry(ss.str());
}

Result<std::vector<ModelRegistryEntry>> registry_from_environment() {
    const char* path = std::getenv(kRegistryEnv);
    if (!path || !*path) return default_registry();
    return load_registry(path);
}

std::string registry_json(const std::vector<ModelRegistryEntry>& registry) {
    auto arr = ordered_json::array();
    for (const auto& e : registry) arr.push_back(entry_to_json(e));
    return arr.dump(2) + "\n";
}

const ModelRegistryEntry* find_model(const std::vector<ModelRegistryEntry>& registry, std::string_view name) {
    auto key = fold_key(name);
    for (const auto& e : registry)
        if (fold_key(e.name) == key) return &e;
    return nullptr;
}

}  // namespace fieldlens::models
