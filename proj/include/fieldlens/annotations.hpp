#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fieldlens/domain.hpp"
#include "fieldlens/result.hpp"

namespace fieldlens::annotations {

using domain::AnnotationSet;
using domain::ImageRecord;
using domain::LabelMap;
using domain::MediaId;

enum class FormatTag { voc_xml, coco_json, yolo_txt, mturk_batch, class_folders };

std::string_view to_string(FormatTag tag);
std::optional<FormatTag> parse_format(std::string_view text);

/// A named text document, as read from or written to disk. `media_id` is set
/// on per-image documents.
struct Document {
    std::string name;
    std::string text;
    std::optional<MediaId> media_id{};
};

/// Pascal VOC: one XML document per image. Documents are merged in
/// lexicographic `name` order. Without `label_hint` the label map is the
/// sorted union of object names; with it, names must resolve against the hint.
Result<AnnotationSet> parse_voc(std::span<const Document> documents, const LabelMap* label_hint = nullptr);

/// COCO instances JSON. Category ids are remapped to dense positions ordered by
/// original id. Annotations without `bbox` are read as classification labels.
Result<AnnotationSet> parse_coco(std::string_view json_text);

struct YoloFile {
    MediaId image_id;
    int width = 0;
    int height = 0;
    std::vector<std::string> lines;
};

/// YOLO text labels, `class cx cy w h [confidence]` with normalized values.
Result<AnnotationSet> parse_yolo(std::span<const YoloFile> files, const std::vector<std::string>& label_file);

/// Reads the per-image documents plus `classes.txt` produced by a YOLO export.
/// `images` supplies dimensions and identity for every labeled media id.
Result<AnnotationSet> parse_yolo_documents(std::span<const Document> documents, std::span<const ImageRecord> images);

enum class AnswerGeometry { absolute_px, normalized };

struct MTurkFieldMapping {
    std::string media_field = "Input.image_url";
    std::string answer_field = "Answer.annotatedResult.boundingBoxes";
    AnswerGeometry answer_geometry = AnswerGeometry::absolute_px;
    std::string class_field = "label";
};

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 comma-separated text; the first record is the header.
Result<CsvTable> parse_csv(std::string_view text);

using ImageDims = std::map<MediaId, std::pair<int, int>>;

/// Mechanical Turk batch results. Each answer payload contributes every JSON
/// object carrying `left`, `top`, `width` and `height`; empty payloads yield
/// unlabeled images.
Result<AnnotationSet> import_mturk(const CsvTable& batch, const MTurkFieldMapping& mapping, const ImageDims& image_dims);

struct FolderEntry {
    MediaId media_id;
    int width = 0;
    int height = 0;
};

/// Classification dataset laid out as one directory per class.
Result<AnnotationSet> ingest_classification_folders(const std::map<std::string, std::vector<FolderEntry>>& listing);

/// Writes `set` in one of the interchange formats.
///   voc_xml:   one `<stem>.xml` document per image
///   coco_json: a single `annotations.json`
///   yolo_txt:  one `<stem>.txt` per image plus `classes.txt`
Result<std::vector<Document>> export_set(const AnnotationSet& set, FormatTag format);

}  // namespace fieldlens::annotations
