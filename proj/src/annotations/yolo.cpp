#include <charconv>
#include <sstream>

#include "common.hpp"
#include "fieldlens/text.hpp"

namespace fieldlens::annotations {

namespace {

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

bool unit_range(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

Result<AnnotationSet> parse_yolo(std::span<const YoloFile> files, const std::vector<std::string>& label_file) {
    AnnotationSet set;
    set.task = domain::Task::detection;
    std::size_t n_labels = label_file.size();
    while (n_labels > 0 && trim(label_file[n_labels - 1]).empty()) --n_labels;
    for (std::size_t i = 0; i < n_labels; ++i) set.label_map.classes.push_back(trim(label_file[i]));

    for (const auto& file : files) {
        ImageRecord img{file.image_id, file.width, file.height};
        if (file.width <= 0 || file.height <= 0)
            return Error{ErrorCode::MissingDims, "yolo: no usable dimensions for " + file.image_id, file.image_id};
        for (std::size_t n = 0; n < file.lines.size(); ++n) {
            const auto where = file.image_id + " line " + std::to_string(n + 1);
            auto t = tokens(file.lines[n]);
            if (t.empty()) continue;
            if (t.size() != 5 && t.size() != 6) return Error{ErrorCode::ParseError, "yolo: " + where, file.image_id};

            std::size_t cls = 0;
            auto [ptr, ec] = std::from_chars(t[0].data(), t[0].data() + t[0].size(), cls);
            if (ec != std::errc{} || ptr != t[0].data() + t[0].size())
                return Error{ErrorCode::ParseError, "yolo: bad class index at " + where, file.image_id};
            if (cls >= set.label_map.size())
                return Error{ErrorCode::ClassOutOfRange,
                             "yolo: class " + t[0] + " with " + std::to_string(set.label_map.size()) +
                                 " classes at " + where,
                             file.image_id};

            double v[5] = {0, 0, 0, 0, 0};
            for (std::size_t k = 1; k < t.size(); ++k) {
                if (!parse_real(t[k], v[k - 1]))
                    return Error{ErrorCode::ParseError, "yolo: bad number '" + t[k] + "' at " + where, file.image_id};
                if (!unit_range(v[k - 1]))
                    return Error{ErrorCode::NormalizedOutOfRange, "yolo: " + t[k] + " outside [0,1] at " + where,
                                 file.image_id};
            }
            const double cx = v[0], cy = v[1], w = v[2], h = v[3];
            domain::BoundingBox box{(cx - w / 2) * file.width, (cy - h / 2) * file.height,
                                    (cx + w / 2) * file.width, (cy + h / 2) * file.height, cls, std::nullopt};
            if (t.size() == 6) box.confidence = v[4];
            detail::snap_to_image(box, file.width, file.height);
            set.boxes[file.image_id].push_back(box);
        }
        set.images.push_back(std::move(img));
    }
    return detail::finish(std::move(set));
}

Result<AnnotationSet> parse_yolo_documents(std::span<const Document> documents, std::span<const ImageRecord> images) {
    std::vector<std::string> label_file;
    bool have_labels = false;
    std::map<MediaId, const Document*> by_media;
    for (const auto& doc : documents) {
        if (doc.name == "classes.txt" && !doc.media_id) {
            label_file = split(doc.text, '\n');
            have_labels = true;
            continue;
        }
        MediaId id = doc.media_id.value_or("");
        if (id.empty()) {
            // match by file stem
            for (const auto& img : images)
                if (detail::with_extension(img.media_id, ".txt") == doc.name) id = img.media_id;
        }
        if (id.empty()) return make_error(ErrorCode::MissingDims, "yolo: no image matches " + doc.name);
        by_media[id] = &doc;
    }
    if (!have_labels) return make_error(ErrorCode::ParseError, "yolo: classes.txt missing");

    std::vector<YoloFile> files;
    for (const auto& img : images) {
        YoloFile f{img.media_id, img.width, img.height, {}};
        if (auto it = by_media.find(img.media_id); it != by_media.end()) {
            f.lines = split(it->second->text, '\n');
            by_media.erase(it);
        }
        files.push_back(std::move(f));
    }
    if (!by_media.empty())
        return Error{ErrorCode::MissingDims, "yolo: no dimensions for " + by_media.begin()->first,
                     by_media.begin()->first};

    auto parsed = parse_yolo(files, label_file);
    if (!parsed) return parsed;
    // YOLO files carry no provenance; restore it from the image index.
    auto set = std::move(parsed).value();
    for (std::size_t i = 0; i < set.images.size(); ++i) set.images[i] = images[i];
    return detail::finish(std::move(set));
}

namespace detail {

std::vector<Document> write_yolo(const AnnotationSet& set) {
    std::vector<Document> docs;
    const auto names = document_names(set, ".txt");
    for (std::size_t i = 0; i < set.images.size(); ++i) {
        const auto& img = set.images[i];
        const double W = img.width;
        const double H = img.height;
        std::string text;
        for (const auto& b : set.boxes_of(img.media_id)) {
            text += std::to_string(b.class_id);
            for (double v : {(b.x_min + b.x_max) / 2 / W, (b.y_min + b.y_max) / 2 / H, b.width() / W, b.height() / H})
                text += " " + format_real(v);
            if (b.confidence) text += " " + format_real(*b.confidence);
            text += "\n";
        }
        docs.push_back({names[i], std::move(text), img.media_id});
    }
    std::string classes;
    for (const auto& c : set.label_map.classes) classes += c + "\n";
    docs.push_back({"classes.txt", std::move(classes), std::nullopt});
    return docs;
}

}  // namespace detail
}  // namespace fieldlens::annotations
