#include <algorithm>
#include <cmath>

#include "fieldlens/models.hpp"
#include "fieldlens/text.hpp"

namespace fieldlens::models {

namespace {

Result<void> validate_constraints(const SelectionConstraints& c) {
    auto positive = [](const std::optional<double>& v) { return !v || (std::isfinite(*v) && *v > 0); };
    if (!positive(c.max_inference_ms)) return make_error(ErrorCode::InvalidConstraints, "max_inference_ms must be positive");
    if (!positive(c.max_size_mb)) return make_error(ErrorCode::InvalidConstraints, "max_size_mb must be positive");
    if (!positive(c.min_map)) return make_error(ErrorCode::InvalidConstraints, "min_map must be positive");
    if (c.num_classes == 0) return make_error(ErrorCode::InvalidConstraints, "num_classes must be positive");
    return {};
}

struct Bound {
    std::string label;
    bool (*fails)(const ModelRegistryEntry&, const SelectionConstraints&);
};

const Bound kBounds[] = {
    {"max_inference_ms", [](const ModelRegistryEntry& e, const SelectionConstraints& c) {
         return c.max_inference_ms && e.inference_ms > *c.max_inference_ms;
     }},
    {"max_size_mb", [](const ModelRegistryEntry& e, const SelectionConstraints& c) {
         return c.max_size_mb && e.size_mb > *c.max_size_mb;
     }},
    {"min_map", [](const ModelRegistryEntry& e, const SelectionConstraints& c) {
         return c.min_map && e.map_coco < *c.min_map;
     }},
    {"num_classes", [](const ModelRegistryEntry& e, const SelectionConstraints& c) {
         return e.class_capacity && *e.class_capacity < c.num_classes;
     }},
};

std::string bound_value(const Bound& b, const SelectionConstraints& c) {
    if (b.label == "max_inference_ms") return "<= " + format_real(*c.max_inference_ms) + " ms";
    if (b.label == "max_size_mb") return "<= " + format_real(*c.max_size_mb) + " MB";
    if (b.label == "min_map") return ">= " + format_real(*c.min_map) + " mAP";
    return std::to_string(c.num_classes) + " classes";
}

bool better(const ModelRegistryEntry& a, const ModelRegistryEntry& b) {
    if (a.map_coco != b.map_coco) return a.map_coco > b.map_coco;
    if (a.inference_ms != b.inference_ms) return a.inference_ms < b.inference_ms;
    if (a.size_mb != b.size_mb) return a.size_mb < b.size_mb;
    return a.name < b.name;
}

}  // namespace

Result<void> check_class_capacity(const ModelRegistryEntry& entry, std::size_t num_classes) {
    if (entry.class_capacity && num_classes > *entry.class_capacity)
        return make_error(ErrorCode::ClassCapacityExceeded, entry.name + " supports up to " +
                                                                std::to_string(*entry.class_capacity) + " classes, got " +
                                                                std::to_string(num_classes));
    return {};
}

Result<ModelSelection> select_model(const std::vector<ModelRegistryEntry>& registry, const SelectionConstraints& c) {
    if (registry.empty()) return make_error(ErrorCode::InvalidRegistry, "registry is empty");
    if (auto ok = validate_constraints(c); !ok) return ok.error();

    std::vector<const ModelRegistryEntry*> same_task;
    for (const auto& e : registry)
        if (e.task == c.task) same_task.push_back(&e);
    if (same_task.empty())
        return make_error(ErrorCode::NoFeasibleModel, "no " + std::string(to_string(c.task)) + " model in the registry");

    std::vector<const ModelRegistryEntry*> feasible;
    for (const auto* e : same_task) {
        bool ok = true;
        for (const auto& b : kBounds) ok = ok && !b.fails(*e, c);
        if (ok) feasible.push_back(e);
    }

    if (feasible.empty()) {
        std::string msg = "no feasible " + std::string(to_string(c.task)) + " model;";
        bool first = true;
        for (const auto& b : kBounds) {
            std::size_t excluded = 0;
            for (const auto* e : same_task) excluded += b.fails(*e, c);
            if (excluded == 0) continue;
            msg += std::string(first ? " " : ", ") + b.label + " " + bound_value(b, c) + " excludes " +
                   std::to_string(excluded) + " of " + std::to_string(same_task.size());
            first = false;
        }
        return make_error(ErrorCode::NoFeasibleModel, msg);
    }

    const auto* best = *std::min_element(feasible.begin(), feasible.end(),
                                         [](const auto* a, const auto* b) { return better(*a, *b); });
    ModelSelection sel{*best, {}};
    sel.notes.push_back(best->name + ": " + format_real(best->map_coco) + " mAP, " + format_real(best->inference_ms) +
                        " ms, " + format_real(best->size_mb) + " MB (best of " + std::to_string(feasible.size()) +
                        " feasible)");
    if (best->stable_on_device == false) {
        for (const auto* e : feasible)
            if (e->stable_on_device == true) {
                sel.notes.push_back(e->name + " ran more steadily on test devices");
                break;
            }
    }
    return sel;
}

}  // namespace fieldlens::models
