#include <nlohmann/json.hpp>

#include "fieldlens/dataset.hpp"

namespace fieldlens::dataset {

using nlohmann::ordered_json;

namespace {

ordered_json class_name(const domain::LabelMap* names, ClassId id) {
    if (names && id < names->size()) return names->classes[id];
    return nullptr;
}

}  // namespace

std::string stats_json(const DatasetStats& stats, const domain::LabelMap* names) {
    ordered_json classes = ordered_json::array();
    for (const auto& [id, images] : stats.per_class_image_count) {
        auto boxes = stats.per_class_box_count.find(id);
        classes.push_back({{"class_id", id},
                           {"name", class_name(names, id)},
                           {"images", images},
                           {"boxes", boxes == stats.per_class_box_count.end() ? 0 : boxes->second}});
    }
    ordered_json j{{"total_images", stats.total_images}, {"unlabeled_images", stats.unlabeled_images}, {"classes", classes}};
    return j.dump(2) + "\n";
}

std::string advisory_json(const AdvisoryReport& report, const domain::LabelMap* names) {
    ordered_json classes = ordered_json::array();
    for (const auto& [id, tier] : report.per_class_tier)
        classes.push_back({{"class_id", id}, {"name", class_name(names, id)}, {"tier", to_string(tier)}});
    ordered_json j{{"classes", classes}, {"notes", report.notes}};
    return j.dump(2) + "\n";
}

std::string frame_plan_json(const FramePlan& plan) {
    ordered_json warnings = ordered_json::array();
    for (const auto& w : plan.warnings) warnings.push_back({{"code", to_string(w.code)}, {"message", w.message}});
    ordered_json j{{"source_video", plan.source_video},
                   {"effective_rate_fps", plan.effective_rate_fps},
                   {"frame_count", plan.timestamps_s.size()},
                   {"timestamps_s", plan.timestamps_s},
                   {"warnings", warnings}};
    return j.dump(2) + "\n";
}

}  // namespace fieldlens::dataset
