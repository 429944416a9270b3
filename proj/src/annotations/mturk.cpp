#include <nlohmann/json.hpp>

#include <algorithm>

#include "common.hpp"
#include "fieldlens/text.hpp"

namespace fieldlens::annotations {

using json = nlohmann::json;

Result<CsvTable> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started || !field.empty())
                    return make_error(ErrorCode::ParseError, "csv: stray quote on line " + std::to_string(line));
                quoted = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                break;
            case '\n':
                end_record();
                ++line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (quoted) return make_error(ErrorCode::ParseError, "csv: unterminated quoted field");
    if (field_started || !field.empty() || !record.empty()) end_record();

    if (records.empty()) return make_error(ErrorCode::ParseError, "csv: no header row");
    CsvTable table;
    table.header = std::move(records.front());
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != table.header.size())
            return make_error(ErrorCode::ParseError, "csv: record " + std::to_string(r) + " has " +
                                                         std::to_string(records[r].size()) + " fields, header has " +
                                                         std::to_string(table.header.size()));
        table.rows.push_back(std::move(records[r]));
    }
    return table;
}

namespace {

bool is_box_object(const json& v) {
    if (!v.is_object()) return false;
    for (const char* key : {"left", "top", "width", "height"}) {
        auto it = v.find(key);
        if (it == v.end() || !it->is_number()) return false;
    }
    return true;
}

void collect_boxes(const json& v, std::vector<const json*>& out) {
    if (is_box_object(v)) {
        out.push_back(&v);
        return;
    }
    if (v.is_array() || v.is_object())
        for (const auto& child : v) collect_boxes(child, out);
}

}  // namespace

Result<AnnotationSet> import_mturk(const CsvTable& batch, const MTurkFieldMapping& mapping, const ImageDims& image_dims) {
    if (mapping.media_field.empty() || mapping.answer_field.empty() || mapping.class_field.empty())
        return make_error(ErrorCode::ParseError, "mturk: field mapping has an empty name");
    auto column = [&](const std::string& name) -> std::optional<std::size_t> {
        auto it = std::find(batch.header.begin(), batch.header.end(), name);
        if (it == batch.header.end()) return std::nullopt;
        return static_cast<std::size_t>(it - batch.header.begin());
    };
    auto media_col = column(mapping.media_field);
    auto answer_col = column(mapping.answer_field);
    if (!media_col) return make_error(ErrorCode::ParseError, "mturk: no column '" + mapping.media_field + "'");
    if (!answer_col) return make_error(ErrorCode::ParseError, "mturk: no column '" + mapping.answer_field + "'");

    struct RawBox {
        double left, top, width, height;
        std::size_t provisional_class;
    };
    std::vector<MediaId> order;
    std::map<MediaId, std::vector<RawBox>> raw;
    detail::LabelCollector labels;

    for (std::size_t r = 0; r < batch.rows.size(); ++r) {
        const auto& row = batch.rows[r];
        const auto row_tag = "mturk: row " + std::to_string(r + 1);
        const MediaId media = trim(row[*media_col]);
        if (media.empty()) return make_error(ErrorCode::ParseError, row_tag + ": empty media id");
        if (!image_dims.count(media))
            return Error{ErrorCode::MissingDims, row_tag + ": no dimensions for " + media, media};
        if (!raw.count(media)) order.push_back(media);
        auto& boxes = raw[media];

        const std::string payload = trim(row[*answer_col]);
        if (payload.empty()) continue;
        json answer;
        try {
            answer = json::parse(payload);
        } catch (const json::parse_error& e) {
            return Error{ErrorCode::ParseError, row_tag + ": " + e.what(), media};
        }
        std::vector<const json*> found;
        collect_boxes(answer, found);
        for (const json* b : found) {
            auto label = b->find(mapping.class_field);
            if (label == b->end() || !label->is_string() || trim(label->get<std::string>()).empty())
                return Error{ErrorCode::ParseError, row_tag + ": box without '" + mapping.class_field + "'", media};
            boxes.push_back({(*b)["left"].get<double>(), (*b)["top"].get<double>(), (*b)["width"].get<double>(),
                             (*b)["height"].get<double>(), labels.intern(label->get<std::string>())});
        }
    }

    AnnotationSet set;
    set.task = domain::Task::detection;
    std::vector<domain::ClassId> remap;
    set.label_map = labels.finalize(remap);
    for (const auto& media : order) {
        const auto [w, h] = image_dims.at(media);
        set.images.push_back(ImageRecord{media, w, h});
        const bool normalized = mapping.answer_geometry == AnswerGeometry::normalized;
        const double sx = normalized ? w : 1.0;
        const double sy = normalized ? h : 1.0;
        for (const auto& rb : raw[media]) {
            domain::BoundingBox box{rb.left * sx, rb.top * sy, (rb.left + rb.width) * sx, (rb.top + rb.height) * sy,
                                    remap[rb.provisional_class], std::nullopt};
            detail::snap_to_image(box, w, h);
            set.boxes[media].push_back(box);
        }
    }
    return detail::finish(std::move(set));
}

}  // namespace fieldlens::annotations
