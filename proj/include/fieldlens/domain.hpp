#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fieldlens/result.hpp"

namespace fieldlens::domain {

using MediaId = std::string;
using ClassId = std::size_t;

enum class Task { detection, classification };

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view text);

/// Ordered class names; a class id is the position in `classes`.
struct LabelMap {
    std::vector<std::string> classes;

    std::size_t size() const { return classes.size(); }
    bool empty() const { return classes.empty(); }
    /// Lookup by identity key (trimmed, case-folded).
    std::optional<ClassId> find(std::string_view name) const;

    bool operator==(const LabelMap&) const = default;
};

/// Pixel box, origin top-left, min-inclusive / max-exclusive.
struct BoundingBox {
    double x_min = 0;
    double y_min = 0;
    double x_max = 0;
    double y_max = 0;
    ClassId class_id = 0;
    std::optional<double> confidence{};

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool operator==(const BoundingBox&) const = default;
};

enum class ImageSource { still, extracted_frame };

struct ImageRecord {
    MediaId media_id;
    int width = 0;
    int height = 0;
    ImageSource source = ImageSource::still;
    std::optional<MediaId> source_video{};
    std::optional<double> timestamp_s{};

    bool operator==(const ImageRecord&) const = default;
};

struct AnnotationSet {
    Task task = Task::detection;
    LabelMap label_map;
    std::vector<ImageRecord> images;
    std::map<MediaId, std::vector<BoundingBox>> boxes;
    std::map<MediaId, ClassId> class_of;

    const ImageRecord* find_image(std::string_view media_id) const;
    /// Boxes of one image; empty when the image has none.
    std::span<const BoundingBox> boxes_of(std::string_view media_id) const;
    bool labeled(std::string_view media_id) const;
};

struct Issue {
    ErrorCode code;
    std::optional<MediaId> media_id{};
    std::string message;
};

struct ValidationReport {
    std::vector<Issue> errors;
    std::vector<Issue> warnings;

    bool ok() const { return errors.empty(); }
    bool has_error(ErrorCode code) const;
    bool has_warning(ErrorCode code) const;
    /// The first error as an `Error`; only meaningful when !ok().
    Error first_error() const;
};

ValidationReport validate_label_map(const LabelMap& label_map);

/// Structural checks over images, boxes and class assignments. An empty label
/// map is accepted here as long as nothing references a class.
ValidationReport validate_annotation_set(const AnnotationSet& set);

/// Compares two sets ignoring image order. Coordinates and confidences within
/// `tolerance`; everything else exact. On mismatch `why` receives a reason.
bool equivalent(const AnnotationSet& a, const AnnotationSet& b, double tolerance, std::string* why = nullptr);

}  // namespace fieldlens::domain
