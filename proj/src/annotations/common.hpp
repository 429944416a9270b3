#pragma once

#include <map>
#include <string>
#include <vector>

#include "fieldlens/annotations.hpp"

namespace fieldlens::annotations::detail {

/// Pulls a converted box edge back onto the image border when floating-point
/// conversion overshoots it by less than a ten-millionth of a pixel.
void snap_to_image(domain::BoundingBox& box, int width, int height);

/// Rejects sets that fail validation; parsers never hand out invalid sets.
Result<AnnotationSet> finish(AnnotationSet set);

/// Collects class names in first-seen spelling, merging case-insensitively.
class LabelCollector {
public:
    /// Returns a provisional id; call `finalize` to get the sorted map and the
    /// provisional-to-final remap.
    std::size_t intern(const std::string& name);
    LabelMap finalize(std::vector<domain::ClassId>& remap) const;

private:
    std::vector<std::string> names_;
    std::map<std::string, std::size_t> index_;
};

/// `name` with its last extension replaced (or appended when absent).
std::string with_extension(const std::string& name, const std::string& ext);

/// Document names for every image, unique within the set.
std::vector<std::string> document_names(const AnnotationSet& set, const std::string& ext);

}  // namespace fieldlens::annotations::detail
