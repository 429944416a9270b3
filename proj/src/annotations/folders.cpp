#include <set>

#include "common.hpp"
#include "fieldlens/text.hpp"

namespace fieldlens::annotations {

Result<AnnotationSet> ingest_classification_folders(const std::map<std::string, std::vector<FolderEntry>>& listing) {
    if (listing.empty()) return make_error(ErrorCode::EmptyDataset, "no class directories");

    AnnotationSet set;
    set.task = domain::Task::classification;
    // std::map iterates in lexicographic order, which is the label order.
    for (const auto& [dir, entries] : listing) set.label_map.classes.push_back(dir);
    auto names = domain::validate_label_map(set.label_map);
    if (!names.ok()) return names.first_error();

    std::set<MediaId> seen;
    domain::ClassId cls = 0;
    for (const auto& [dir, entries] : listing) {
        for (const auto& e : entries) {
            if (!seen.insert(e.media_id).second)
                return Error{ErrorCode::DuplicateMediaId, "image appears in more than one class directory",
                             e.media_id};
            set.images.push_back(ImageRecord{e.media_id, e.width, e.height});
            set.class_of[e.media_id] = cls;
        }
        ++cls;
    }
    if (set.images.empty()) return make_error(ErrorCode::EmptyDataset, "class directories contain no images");
    return detail::finish(std::move(set));
}

namespace detail {
std::vector<Document> write_voc(const AnnotationSet& set);
std::string write_coco(const AnnotationSet& set);
std::vector<Document> write_yolo(const AnnotationSet& set);
}  // namespace detail

Result<std::vector<Document>> export_set(const AnnotationSet& set, FormatTag format) {
    const bool detection = set.task == domain::Task::detection;
    switch (format) {
        case FormatTag::voc_xml:
        case FormatTag::yolo_txt:
            if (!detection)
                return make_error(ErrorCode::UnsupportedExport,
                                  std::string(to_string(format)) + " carries boxes only; set is classification");
            break;
        case FormatTag::coco_json:
            break;
        case FormatTag::mturk_batch:
        case FormatTag::class_folders:
            return make_error(ErrorCode::UnsupportedExport,
                              std::string(to_string(format)) + " is an import-only format");
    }
    auto report = domain::validate_annotation_set(set);
    if (!report.ok()) return report.first_error();

    switch (format) {
        case FormatTag::voc_xml: return detail::write_voc(set);
        case FormatTag::yolo_txt: return detail::write_yolo(set);
        default: return std::vector<Document>{{"annotations.json", detail::write_coco(set), std::nullopt}};
    }
}

}  // namespace fieldlens::annotations
