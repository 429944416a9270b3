#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

#include "common.hpp"

namespace fieldlens::annotations {

using json = nlohmann::json;

namespace {

Error parse_error(const std::string& what) { return make_error(ErrorCode::ParseError, "coco: " + what); }

// COCO ids are usually integers; some exporters write strings.
std::optional<std::string> id_key(const json& v) {
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    if (v.is_string()) return v.get<std::string>();
    return std::nullopt;
}

std::optional<double> number(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) return std::nullopt;
    return it->get<double>();
}

}  // namespace

Result<AnnotationSet> parse_coco(std::string_view json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        return parse_error(e.what());
    }
    if (!doc.is_object()) return parse_error("top level is not an object");
    for (const char* key : {"images", "annotations", "categories"})
        if (!doc.contains(key) || !doc[key].is_array()) return parse_error(std::string("missing array '") + key + "'");

    AnnotationSet set;

    // categories, remapped densely by ascending original id
    std::vector<std::pair<long long, std::string>> categories;
    for (const auto& cat : doc["categories"]) {
        if (!cat.is_object() || !cat.contains("id") || !cat["id"].is_number_integer() || !cat.contains("name") ||
            !cat["name"].is_string())
            return parse_error("category needs integer id and string name");
        categories.emplace_back(cat["id"].get<long long>(), cat["name"].get<std::string>());
    }
    std::sort(categories.begin(), categories.end());
    std::map<long long, domain::ClassId> category_index;
    for (const auto& [id, name] : categories) {
        if (!category_index.emplace(id, set.label_map.classes.size()).second)
            return parse_error("duplicate category id " + std::to_string(id));
        set.label_map.classes.push_back(name);
    }

    std::map<std::string, MediaId> image_index;
    for (const auto& im : doc["images"]) {
        if (!im.is_object()) return parse_error("image entry is not an object");
        auto key = im.contains("id") ? id_key(im["id"]) : std::nullopt;
        if (!key) return parse_error("image without id");
        ImageRecord img;
        img.media_id = im.value("file_name", *key);
        auto w = number(im, "width");
        auto h = number(im, "height");
        if (!w || !h) return Error{ErrorCode::MissingSize, "coco: image " + *key + " lacks width/height", img.media_id};
        if (*w != std::floor(*w) || *h != std::floor(*h)) return parse_error("non-integral size for image " + *key);
        img.width = static_cast<int>(*w);
        img.height = static_cast<int>(*h);
        if (im.value("source", "still") == "extracted_frame") {
            auto ts = number(im, "timestamp_s");
            if (!ts || !im.contains("source_video") || !im["source_video"].is_string())
                return parse_error("frame image " + *key + " lacks source_video/timestamp_s");
            img.source = domain::ImageSource::extracted_frame;
            img.source_video = im["source_video"].get<std::string>();
            img.timestamp_s = *ts;
        }
        if (!image_index.emplace(*key, img.media_id).second) return parse_error("duplicate image id " + *key);
        set.images.push_back(std::move(img));
    }

    bool any_bbox = false;
    bool any_label_only = false;
    for (const auto& ann : doc["annotations"]) {
        if (!ann.is_object()) return parse_error("annotation is not an object");
        auto image_key = ann.contains("image_id") ? id_key(ann["image_id"]) : std::nullopt;
        if (!image_key) return parse_error("annotation without image_id");
        auto img = image_index.find(*image_key);
        if (img == image_index.end())
            return make_error(ErrorCode::DanglingImageId, "coco: annotation references image " + *image_key);
        if (!ann.contains("category_id") || !ann["category_id"].is_number_integer())
            return parse_error("annotation without integer category_id");
        auto cat = category_index.find(ann["category_id"].get<long long>());
        if (cat == category_index.end())
            return Error{ErrorCode::UnknownClass,
                         "coco: category " + std::to_string(ann["category_id"].get<long long>()), img->second};

        if (!ann.contains("bbox")) {
            any_label_only = true;
            if (!set.class_of.emplace(img->second, cat->second).second)
                return parse_error("image " + img->second + " has more than one class label");
            continue;
        }
        any_bbox = true;
        const auto& bbox = ann["bbox"];
        if (!bbox.is_array() || bbox.size() != 4 ||
            !std::all_of(bbox.begin(), bbox.end(), [](const json& v) { return v.is_number(); }))
            return parse_error("bbox must be four numbers");
        const double x = bbox[0].get<double>();
        const double y = bbox[1].get<double>();
        domain::BoundingBox box{x, y, x + bbox[2].get<double>(), y + bbox[3].get<double>(), cat->second, std::nullopt};
        if (auto score = number(ann, "score")) box.confidence = *score;
        if (const auto* rec = set.find_image(img->second)) detail::snap_to_image(box, rec->width, rec->height);
        set.boxes[img->second].push_back(box);
    }
    if (any_bbox && any_label_only) return parse_error("mixes bbox and label-only annotations");

    set.task = any_label_only ? domain::Task::classification : domain::Task::detection;
    if (doc.contains("info") && doc["info"].is_object() && doc["info"].contains("task")) {
        auto task = doc["info"]["task"].is_string() ? domain::parse_task(doc["info"]["task"].get<std::string>())
                                                     : std::nullopt;
        if (!task) return parse_error("unknown info.task");
        if ((*task == domain::Task::detection && any_label_only) ||
            (*task == domain::Task::classification && any_bbox))
            return parse_error("info.task contradicts the annotations");
        set.task = *task;
    }
    return detail::finish(std::move(set));
}

namespace detail {

std::string write_coco(const AnnotationSet& set) {
    json doc;
    doc["info"] = {{"description", "fieldlens annotation export"}, {"task", domain::to_string(set.task)}};
    doc["images"] = json::array();
    doc["annotations"] = json::array();
    doc["categories"] = json::array();
    for (std::size_t k = 0; k < set.label_map.size(); ++k)
        doc["categories"].push_back({{"id", k + 1}, {"name", set.label_map.classes[k]}});

    long long next_ann = 1;
    for (std::size_t i = 0; i < set.images.size(); ++i) {
        const auto& img = set.images[i];
        const auto image_id = static_cast<long long>(i + 1);
        json im = {{"id", image_id}, {"file_name", img.media_id}, {"width", img.width}, {"height", img.height}};
        if (img.source == domain::ImageSource::extracted_frame) {
            im["source"] = "extracted_frame";
            im["source_video"] = *img.source_video;
            im["timestamp_s"] = *img.timestamp_s;
        }
        doc["images"].push_back(std::move(im));

        if (set.task == domain::Task::classification) {
            auto it = set.class_of.find(img.media_id);
            if (it != set.class_of.end())
                doc["annotations"].push_back(
                    {{"id", next_ann++}, {"image_id", image_id}, {"category_id", it->second + 1}});
            continue;
        }
        for (const auto& b : set.boxes_of(img.media_id)) {
            json ann = {{"id", next_ann++},
                        {"image_id", image_id},
                        {"category_id", b.class_id + 1},
                        {"bbox", {b.x_min, b.y_min, b.width(), b.height()}},
                        {"area", b.width() * b.height()},
                        {"iscrowd", 0}};
            if (b.confidence) ann["score"] = *b.confidence;
            doc["annotations"].push_back(std::move(ann));
        }
    }
    return doc.dump(2);
}

}  // namespace detail
}  // namespace fieldlens::annotations
