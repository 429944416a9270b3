#include <set>

#include "fieldlens/dataset.hpp"

namespace fieldlens::dataset {

DatasetStats dataset_stats(const AnnotationSet& set) {
    DatasetStats stats;
    for (ClassId c = 0; c < set.label_map.size(); ++c) {
        stats.per_class_image_count[c] = 0;
        stats.per_class_box_count[c] = 0;
    }
    stats.total_images = set.images.size();
    for (const auto& img : set.images) {
        if (set.task == domain::Task::classification) {
            auto it = set.class_of.find(img.media_id);
            if (it == set.class_of.end()) {
                ++stats.unlabeled_images;
                continue;
            }
            ++stats.per_class_image_count[it->second];
            continue;
        }
        auto boxes = set.boxes_of(img.media_id);
        if (boxes.empty()) {
            ++stats.unlabeled_images;
            continue;
        }
        std::set<ClassId> present;
        for (const auto& b : boxes) {
            ++stats.per_class_box_count[b.class_id];
            present.insert(b.class_id);
        }
        for (ClassId c : present) ++stats.per_class_image_count[c];
    }
    return stats;
}

std::string_view to_string(Tier tier) {
    switch (tier) {
        case Tier::insufficient: return "insufficient";
        case Tier::marginal: return "marginal";
        case Tier::good: return "good";
        case Tier::optimal: return "optimal";
    }
    return "insufficient";
}

Tier tier_for(std::size_t n, const TierThresholds& t) {
    if (n >= t.optimal) return Tier::optimal;
    if (n >= t.good) return Tier::good;
    if (n >= t.marginal) return Tier::marginal;
    return Tier::insufficient;
}

AdvisoryReport advise_sufficiency(const DatasetStats& stats, const domain::LabelMap* names, const TierThresholds& t) {
    AdvisoryReport report;
    for (const auto& [c, n] : stats.per_class_image_count) {
        Tier tier = tier_for(n, t);
        report.per_class_tier[c] = tier;
        std::string name = names && c < names->size() ? names->classes[c] : "class " + std::to_string(c);
        std::string note = name + ": " + std::to_string(n) + " images, " + std::string(to_string(tier));
        switch (tier) {
            case Tier::insufficient: note += " (" + std::to_string(t.marginal - n) + " more to reach marginal)"; break;
            case Tier::marginal: note += " (" + std::to_string(t.good - n) + " more to reach good)"; break;
            case Tier::good: note += " (" + std::to_string(t.optimal - n) + " more to reach optimal)"; break;
            case Tier::optimal: break;
        }
        report.notes.push_back(std::move(note));
    }
    if (stats.unlabeled_images > 0)
        report.notes.push_back(std::to_string(stats.unlabeled_images) + " unlabeled images are not counted");
    return report;
}

}  // namespace fieldlens::dataset
