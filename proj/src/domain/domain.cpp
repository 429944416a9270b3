#include "fieldlens/domain.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "fieldlens/text.hpp"

namespace fieldlens::domain {

std::string_view to_string(Task task) {
    return task == Task::detection ? "detection" : "classification";
}

std::optional<Task> parse_task(std::string_view text) {
    if (text == "detection") return Task::detection;
    if (text == "classification") return Task::classification;
    return std::nullopt;
}

std::optional<ClassId> LabelMap::find(std::string_view name) const {
    const std::string key = fold_key(name);
    for (std::size_t i = 0; i < classes.size(); ++i)
        if (fold_key(classes[i]) == key) return i;
    return std::nullopt;
}

const ImageRecord* AnnotationSet::find_image(std::string_view media_id) const {
    for (const auto& img : images)
        if (img.media_id == media_id) return &img;
    return nullptr;
}

std::span<const BoundingBox> AnnotationSet::boxes_of(std::string_view media_id) const {
    auto it = boxes.find(std::string(media_id));
    if (it == boxes.end()) return {};
    return it->second;
}

bool AnnotationSet::labeled(std::string_view media_id) const {
    if (task == Task::classification) return class_of.count(std::string(media_id)) > 0;
    return !boxes_of(media_id).empty();
}

bool ValidationReport::has_error(ErrorCode code) const {
    for (const auto& e : errors)
        if (e.code == code) return true;
    return false;
}

bool ValidationReport::has_warning(ErrorCode code) const {
    for (const auto& w : warnings)
        if (w.code == code) return true;
    return false;
}

Error ValidationReport::first_error() const {
    if (errors.empty()) return make_error(ErrorCode::ValidationFailed, "no errors");
    const auto& e = errors.front();
    return Error{e.code, e.message, e.media_id};
}

namespace {

void check_label_names(const LabelMap& label_map, ValidationReport& report) {
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < label_map.classes.size(); ++i) {
        const auto key = fold_key(label_map.classes[i]);
        if (key.empty()) {
            report.errors.push_back({ErrorCode::EmptyClassName, std::nullopt,
                                     "class " + std::to_string(i) + " has an empty name"});
            continue;
        }
        auto [it, inserted] = seen.emplace(key, i);
        if (!inserted) {
            report.errors.push_back({ErrorCode::DuplicateClass, std::nullopt,
                                     "class '" + label_map.classes[i] + "' duplicates class " +
                                         std::to_string(it->second) + " '" + label_map.classes[it->second] + "'"});
        }
    }
}

std::string box_text(const BoundingBox& b) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << b.x_min << "," << b.y_min << "," << b.x_max << "," << b.y_max << ")";
    return os.str();
}

void check_box(const BoundingBox& b, const ImageRecord& img, const LabelMap& label_map, ValidationReport& report) {
    const auto& id = img.media_id;
    if (!std::isfinite(b.x_min) || !std::isfinite(b.y_min) || !std::isfinite(b.x_max) || !std::isfinite(b.y_max)) {
        report.errors.push_back({ErrorCode::NonFiniteCoordinate, id, "box has a non-finite coordinate"});
        return;
    }
    if (!(b.x_min < b.x_max) || !(b.y_min < b.y_max))
        report.errors.push_back({ErrorCode::DegenerateBox, id, "degenerate box " + box_text(b)});
    if (b.x_min < 0 || b.y_min < 0 || b.x_max > img.width || b.y_max > img.height)
        report.errors.push_back({ErrorCode::BoxOutOfBounds, id,
                                 "box " + box_text(b) + " outside " + std::to_string(img.width) + "x" +
                                     std::to_string(img.height)});
    if (b.class_id >= label_map.size())
        report.errors.push_back({ErrorCode::UnknownClassId, id, "class id " + std::to_string(b.class_id)});
    if (b.confidence && !(*b.confidence >= 0.0 && *b.confidence <= 1.0))
        report.errors.push_back({ErrorCode::InvalidConfidence, id, "confidence outside [0,1]"});
}

}  // namespace

ValidationReport validate_label_map(const LabelMap& label_map) {
    ValidationReport report;
    if (label_map.empty()) {
        report.errors.push_back({ErrorCode::EmptyLabelMap, std::nullopt, "label map has no classes"});
        return report;
    }
    check_label_names(label_map, report);
    return report;
}

ValidationReport validate_annotation_set(const AnnotationSet& set) {
    ValidationReport report;
    check_label_names(set.label_map, report);

    std::map<std::string, const ImageRecord*> by_id;
    for (const auto& img : set.images) {
        if (!by_id.emplace(img.media_id, &img).second) {
            report.errors.push_back({ErrorCode::DuplicateMediaId, img.media_id, "media id listed twice"});
            continue;
        }
        if (img.width <= 0 || img.height <= 0)
            report.errors.push_back({ErrorCode::InvalidDimensions, img.media_id, "non-positive image dimensions"});
        const bool frame = img.source == ImageSource::extracted_frame;
        const bool has_origin = img.source_video.has_value() && img.timestamp_s.has_value();
        const bool has_any_origin = img.source_video.has_value() || img.timestamp_s.has_value();
        if (frame ? !has_origin : has_any_origin)
            report.errors.push_back({ErrorCode::InconsistentFrameSource, img.media_id,
                                     "extracted frames need source video and timestamp, stills neither"});
        else if (img.timestamp_s && !(*img.timestamp_s >= 0 && std::isfinite(*img.timestamp_s)))
            report.errors.push_back({ErrorCode::InconsistentFrameSource, img.media_id, "invalid frame timestamp"});
    }

    if (set.task == Task::detection && !set.class_of.empty())
        report.errors.push_back({ErrorCode::TaskLabelMismatch, std::nullopt, "detection set carries class labels"});
    if (set.task == Task::classification) {
        for (const auto& [id, list] : set.boxes)
            if (!list.empty()) {
                report.errors.push_back(
                    {ErrorCode::TaskLabelMismatch, id, "classification set carries bounding boxes"});
                break;
            }
    }

    for (const auto& [id, list] : set.boxes) {
        auto it = by_id.find(id);
        if (it == by_id.end()) {
            report.errors.push_back({ErrorCode::DanglingMediaId, id, "boxes reference an unknown image"});
            continue;
        }
        for (const auto& b : list) check_box(b, *it->second, set.label_map, report);
    }
    for (const auto& [id, cls] : set.class_of) {
        if (!by_id.count(id))
            report.errors.push_back({ErrorCode::DanglingMediaId, id, "class label references an unknown image"});
        if (cls >= set.label_map.size())
            report.errors.push_back({ErrorCode::UnknownClassId, id, "class id " + std::to_string(cls)});
    }

    for (const auto& img : set.images)
        if (!set.labeled(img.media_id))
            report.warnings.push_back({ErrorCode::UnlabeledImage, img.media_id, "image has no annotations"});
    return report;
}

namespace {

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

bool fail(std::string* why, std::string reason) {
    if (why) *why = std::move(reason);
    return false;
}

}  // namespace

bool equivalent(const AnnotationSet& a, const AnnotationSet& b, double tol, std::string* why) {
    if (a.task != b.task) return fail(why, "task differs");
    if (a.label_map != b.label_map) return fail(why, "label map differs");
    if (a.images.size() != b.images.size()) return fail(why, "image count differs");
    for (const auto& img : a.images) {
        const auto* other = b.find_image(img.media_id);
        if (!other) return fail(why, "image " + img.media_id + " missing");
        if (img.width != other->width || img.height != other->height || img.source != other->source ||
            img.source_video != other->source_video)
            return fail(why, "image " + img.media_id + " record differs");
        if (img.timestamp_s.has_value() != other->timestamp_s.has_value() ||
            (img.timestamp_s && !near(*img.timestamp_s, *other->timestamp_s, tol)))
            return fail(why, "image " + img.media_id + " timestamp differs");

        auto lhs = a.boxes_of(img.media_id);
        auto rhs = b.boxes_of(img.media_id);
        if (lhs.size() != rhs.size()) return fail(why, "box count differs for " + img.media_id);
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            const auto& p = lhs[i];
            const auto& q = rhs[i];
            if (p.class_id != q.class_id) return fail(why, "class id differs for " + img.media_id);
            if (!near(p.x_min, q.x_min, tol) || !near(p.y_min, q.y_min, tol) || !near(p.x_max, q.x_max, tol) ||
                !near(p.y_max, q.y_max, tol))
                return fail(why, "coordinates differ for " + img.media_id + ": " + box_text(p) + " vs " +
                                     box_text(q));
            if (p.confidence.has_value() != q.confidence.has_value() ||
                (p.confidence && !near(*p.confidence, *q.confidence, tol)))
                return fail(why, "confidence differs for " + img.media_id);
        }
    }
    if (a.class_of != b.class_of) return fail(why, "class assignments differ");
    return true;
}

}  // namespace fieldlens::domain
