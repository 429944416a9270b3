#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "common.hpp"
#include "fieldlens/text.hpp"

namespace fieldlens::annotations {

namespace pt = boost::property_tree;

namespace {

Error parse_error(const Document& doc, const std::string& what) {
    return Error{ErrorCode::ParseError, doc.name + ": " + what, std::nullopt};
}

std::optional<double> real_at(const pt::ptree& node, const std::string& path) {
    auto v = node.get_optional<std::string>(path);
    if (!v) return std::nullopt;
    double out = 0;
    if (!parse_real(*v, out)) return std::nullopt;
    return out;
}

struct ParsedObject {
    std::size_t provisional_class;
    domain::BoundingBox box;
};

}  // namespace

Result<AnnotationSet> parse_voc(std::span<const Document> documents, const LabelMap* label_hint) {
    std::vector<const Document*> ordered;
    for (const auto& d : documents) ordered.push_back(&d);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const Document* a, const Document* b) { return a->name < b->name; });

    AnnotationSet set;
    set.task = domain::Task::detection;
    detail::LabelCollector labels;
    std::map<MediaId, std::vector<ParsedObject>> parsed;

    for (const Document* doc : ordered) {
        pt::ptree tree;
        try {
            std::istringstream in(doc->text);
            pt::read_xml(in, tree, pt::xml_parser::trim_whitespace);
        } catch (const pt::xml_parser_error& e) {
            return parse_error(*doc, e.message() + " at line " + std::to_string(e.line()));
        }
        auto root = tree.get_child_optional("annotation");
        if (!root) return parse_error(*doc, "missing <annotation> root");

        ImageRecord img;
        img.media_id = trim(root->get("filename", ""));
        if (img.media_id.empty()) img.media_id = detail::with_extension(doc->name, "");

        auto width = real_at(*root, "size.width");
        auto height = real_at(*root, "size.height");
        if (!width || !height)
            return Error{ErrorCode::MissingSize, doc->name + ": <size> lacks width or height", img.media_id};
        if (*width != std::floor(*width) || *height != std::floor(*height))
            return parse_error(*doc, "non-integral image size");
        img.width = static_cast<int>(*width);
        img.height = static_cast<int>(*height);

        if (auto video = root->get_optional<std::string>("source.video")) {
            auto ts = real_at(*root, "source.timestamp_s");
            if (!ts) return parse_error(*doc, "frame source without timestamp");
            img.source = domain::ImageSource::extracted_frame;
            img.source_video = trim(*video);
            img.timestamp_s = *ts;
        }

        auto& objects = parsed[img.media_id];
        for (const auto& [tag, node] : *root) {
            if (tag != "object") continue;
            auto name = node.get_optional<std::string>("name");
            if (!name || trim(*name).empty()) return parse_error(*doc, "<object> without <name>");
            auto x_min = real_at(node, "bndbox.xmin");
            auto y_min = real_at(node, "bndbox.ymin");
            auto x_max = real_at(node, "bndbox.xmax");
            auto y_max = real_at(node, "bndbox.ymax");
            if (!x_min || !y_min || !x_max || !y_max)
                return parse_error(*doc, "<object> '" + *name + "' has an incomplete <bndbox>");

            ParsedObject obj;
            obj.box = {*x_min, *y_min, *x_max, *y_max, 0, std::nullopt};
            if (node.get_child_optional("confidence")) {
                auto c = real_at(node, "confidence");
                if (!c) return parse_error(*doc, "bad <confidence>");
                obj.box.confidence = *c;
            }
            if (label_hint) {
                auto id = label_hint->find(*name);
                if (!id) return Error{ErrorCode::UnknownClass, doc->name + ": class '" + *name + "'", img.media_id};
                obj.provisional_class = *id;
            } else {
                obj.provisional_class = labels.intern(*name);
            }
            objects.push_back(obj);
        }
        set.images.push_back(std::move(img));
    }

    std::vector<domain::ClassId> remap;
    if (label_hint) {
        set.label_map = *label_hint;
        remap.resize(label_hint->size());
        for (std::size_t i = 0; i < remap.size(); ++i) remap[i] = i;
    } else {
        set.label_map = labels.finalize(remap);
    }
    for (auto& [id, objects] : parsed) {
        if (objects.empty()) continue;
        auto& out = set.boxes[id];
        for (auto& obj : objects) {
            obj.box.class_id = remap[obj.provisional_class];
            out.push_back(obj.box);
        }
    }
    return detail::finish(std::move(set));
}

namespace detail {

std::vector<Document> write_voc(const AnnotationSet& set) {
    std::vector<Document> docs;
    const auto names = document_names(set, ".xml");
    for (std::size_t i = 0; i < set.images.size(); ++i) {
        const auto& img = set.images[i];
        pt::ptree tree;
        auto& root = tree.put_child("annotation", pt::ptree{});
        root.put("filename", img.media_id);
        if (img.source == domain::ImageSource::extracted_frame) {
            root.put("source.video", *img.source_video);
            root.put("source.timestamp_s", format_real(*img.timestamp_s));
        }
        root.put("size.width", img.width);
        root.put("size.height", img.height);
        root.put("size.depth", 3);
        root.put("segmented", 0);
        for (const auto& b : set.boxes_of(img.media_id)) {
            pt::ptree obj;
            obj.put("name", set.label_map.classes[b.class_id]);
            obj.put("pose", "Unspecified");
            obj.put("truncated", 0);
            obj.put("difficult", 0);
            if (b.confidence) obj.put("confidence", format_real(*b.confidence));
            obj.put("bndbox.xmin", format_real(b.x_min));
            obj.put("bndbox.ymin", format_real(b.y_min));
            obj.put("bndbox.xmax", format_real(b.x_max));
            obj.put("bndbox.ymax", format_real(b.y_max));
            root.add_child("object", obj);
        }
        std::ostringstream out;
        pt::write_xml(out, tree, pt::xml_writer_make_settings<std::string>(' ', 2));
        docs.push_back({names[i], out.str(), img.media_id});
    }
    return docs;
}

}  // namespace detail
}  // namespace fieldlens::annotations
