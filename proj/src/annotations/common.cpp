#include "common.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "fieldlens/text.hpp"

namespace fieldlens::annotations {

std::string_view to_string(FormatTag tag) {
    switch (tag) {
        case FormatTag::voc_xml: return "voc_xml";
        case FormatTag::coco_json: return "coco_json";
        case FormatTag::yolo_txt: return "yolo_txt";
        case FormatTag::mturk_batch: return "mturk_batch";
        case FormatTag::class_folders: return "class_folders";
    }
    return "unknown";
}

std::optional<FormatTag> parse_format(std::string_view text) {
    if (text == "voc_xml" || text == "voc") return FormatTag::voc_xml;
    if (text == "coco_json" || text == "coco") return FormatTag::coco_json;
    if (text == "yolo_txt" || text == "yolo") return FormatTag::yolo_txt;
    if (text == "mturk_batch" || text == "mturk") return FormatTag::mturk_batch;
    if (text == "class_folders" || text == "folders") return FormatTag::class_folders;
    return std::nullopt;
}

namespace detail {

namespace {
constexpr double kEdgeSlack = 1e-7;

void snap(double& v, double limit) {
    if (v < 0 && v >= -kEdgeSlack) v = 0;
    if (v > limit && v <= limit + kEdgeSlack) v = limit;
}
}  // namespace

void snap_to_image(domain::BoundingBox& box, int width, int height) {
    snap(box.x_min, width);
    snap(box.x_max, width);
    snap(box.y_min, height);
    snap(box.y_max, height);
}

Result<AnnotationSet> finish(AnnotationSet set) {
    auto report = domain::validate_annotation_set(set);
    if (!report.ok()) return report.first_error();
    return set;
}

std::size_t LabelCollector::intern(const std::string& name) {
    auto key = fold_key(name);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    index_.emplace(key, names_.size());
    names_.push_back(trim(name));
    return names_.size() - 1;
}

LabelMap LabelCollector::finalize(std::vector<domain::ClassId>& remap) const {
    std::vector<std::size_t> order(names_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return names_[a] < names_[b]; });
    LabelMap map;
    remap.assign(names_.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        map.classes.push_back(names_[order[pos]]);
        remap[order[pos]] = pos;
    }
    return map;
}

std::string with_extension(const std::string& name, const std::string& ext) {
    auto slash = name.find_last_of('/');
    auto dot = name.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash) && dot > 0)
        return name.substr(0, dot) + ext;
    return name + ext;
}

std::vector<std::string> document_names(const AnnotationSet& set, const std::string& ext) {
    std::vector<std::string> names;
    std::set<std::string> used;
    for (const auto& img : set.images) {
        std::string safe = img.media_id;
        for (char& c : safe)
            if (c == '/' || c == '\\' || c == ':' || c == '?' || c == '*' || c == '"' || c == '<' || c == '>' ||
                c == '|')
                c = '_';
        std::string candidate = with_extension(safe, ext);
        for (int n = 1; used.count(candidate); ++n)
            candidate = with_extension(safe, "_" + std::to_string(n) + ext);
        used.insert(candidate);
        names.push_back(candidate);
    }
    return names;
}

}  // namespace detail
}  // namespace fieldlens::annotations
