#include "codec.hpp"

#include <cmath>
#include <stdexcept>

namespace fieldlens::service::detail {

namespace {

ordered_json opt(const std::optional<std::string>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

std::optional<std::string> opt_string(const ordered_json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

template <typename T>
T required_enum(std::optional<T> v, const std::string& text, const char* what) {
    if (!v) throw std::invalid_argument(std::string("unknown ") + what + " '" + text + "'");
    return *v;
}

}  // namespace

ordered_json box_to_json(const domain::BoundingBox& b) {
    ordered_json j{{"x_min", b.x_min}, {"y_min", b.y_min}, {"x_max", b.x_max}, {"y_max", b.y_max}, {"class_id", b.class_id}};
    if (b.confidence) j["confidence"] = *b.confidence;
    return j;
}

domain::BoundingBox box_from_json(const ordered_json& j) {
    domain::BoundingBox b;
    b.x_min = j.at("x_min").get<double>();
    b.y_min = j.at("y_min").get<double>();
    b.x_max = j.at("x_max").get<double>();
    b.y_max = j.at("y_max").get<double>();
    const auto& id = j.at("class_id");
    if (!id.is_number_unsigned()) throw std::invalid_argument("class_id must be a non-negative integer");
    b.class_id = id.get<domain::ClassId>();
    if (j.contains("confidence") && !j.at("confidence").is_null()) b.confidence = j.at("confidence").get<double>();
    return b;
}

ordered_json boxes_to_json(const std::vector<domain::BoundingBox>& boxes) {
    auto a = ordered_json::array();
    for (const auto& b : boxes) a.push_back(box_to_json(b));
    return a;
}

std::vector<domain::BoundingBox> boxes_from_json(const ordered_json& j) {
    if (!j.is_array()) throw std::invalid_argument("boxes must be an array");
    std::vector<domain::BoundingBox> out;
    for (const auto& b : j) out.push_back(box_from_json(b));
    return out;
}

ordered_json account_to_json(const Account& a) {
    return {{"account_id", a.account_id},
            {"method", to_string(a.method)},
            {"email", opt(a.email)},
            {"role", to_string(a.role)},
            {"created_at", a.created_at}};
}

ordered_json account_to_document(const Account& a) {
    auto j = account_to_json(a);
    j["credential_hash"] = opt(a.credential_hash);
    return j;
}

Account account_from_document(const ordered_json& j) {
    Account a;
    a.account_id = j.at("account_id").get<std::string>();
    auto method = j.at("method").get<std::string>();
    a.method = required_enum(parse_sign_in_method(method), method, "sign-in method");
    a.email = opt_string(j, "email");
    a.credential_hash = opt_string(j, "credential_hash");
    auto role = j.at("role").get<std::string>();
    a.role = required_enum(parse_role(role), role, "role");
    a.created_at = j.at("created_at").get<std::string>();
    return a;
}

ordered_json project_to_json(const Project& p) {
    return {{"project_id", p.project_id},
            {"owner", p.owner},
            {"name", p.name},
            {"task", domain::to_string(p.task)},
            {"label_map", p.label_map.classes},
            {"dataset_refs", p.dataset_refs},
            {"model_package_refs", p.model_package_refs},
            {"bundle_refs", p.bundle_refs},
            {"created_at", p.created_at}};
}

Project project_from_json(const ordered_json& j) {
    Project p;
    p.project_id = j.at("project_id").get<std::string>();
    p.owner = j.at("owner").get<std::string>();
    p.name = j.at("name").get<std::string>();
    auto task = j.at("task").get<std::string>();
    p.task = required_enum(domain::parse_task(task), task, "task");
    p.label_map.classes = j.at("label_map").get<std::vector<std::string>>();
    p.dataset_refs = j.at("dataset_refs").get<std::vector<std::string>>();
    p.model_package_refs = j.at("model_package_refs").get<std::vector<std::string>>();
    p.bundle_refs = j.at("bundle_refs").get<std::vector<std::string>>();
    p.created_at = j.at("created_at").get<std::string>();
    return p;
}

ordered_json payload_to_json(const ObservationPayload& p) {
    ordered_json j{{"captured_at", p.captured_at}};
    j["geo"] = p.geo ? ordered_json{{"lat", p.geo->lat}, {"lon", p.geo->lon}} : ordered_json(nullptr);
    j["width"] = p.width;
    j["height"] = p.height;
    j["detections"] = boxes_to_json(p.detections);
    j["mode"] = to_string(p.mode);
    j["media_type"] = p.media_type;
    return j;
}

ObservationPayload payload_from_json(const ordered_json& j) {
    ObservationPayload p;
    p.captured_at = j.at("captured_at").get<std::string>();
    if (j.contains("geo") && !j.at("geo").is_null())
        p.geo = GeoPoint{j.at("geo").at("lat").get<double>(), j.at("geo").at("lon").get<double>()};
    p.width = j.at("width").get<int>();
    p.height = j.at("height").get<int>();
    if (j.contains("detections")) p.detections = boxes_from_json(j.at("detections"));
    auto mode = j.at("mode").get<std::string>();
    p.mode = required_enum(parse_mode(mode), mode, "mode");
    if (auto t = opt_string(j, "media_type")) p.media_type = *t;
    return p;
}

ordered_json observation_to_json(const Observation& o) {
    return {{"observation_id", o.observation_id},
            {"project_id", o.project_id},
            {"submitter", o.submitter},
            {"media_ref", o.media_ref},
            {"checksum", o.checksum},
            {"media_size", o.media_size},
            {"payload", payload_to_json(o.payload)},
            {"idempotency_key", opt(o.idempotency_key)},
            {"received_at", o.received_at}};
}

Observation observation_from_json(const ordered_json& j) {
    Observation o;
    o.observation_id = j.at("observation_id").get<std::string>();
    o.project_id = j.at("project_id").get<std::string>();
    o.submitter = j.at("submitter").get<std::string>();
    o.media_ref = j.at("media_ref").get<std::string>();
    o.checksum = j.at("checksum").get<std::string>();
    o.media_size = j.at("media_size").get<std::size_t>();
    o.payload = payload_from_json(j.at("payload"));
    o.idempotency_key = opt_string(j, "idempotency_key");
    o.received_at = j.at("received_at").get<std::string>();
    return o;
}

ordered_json record_to_json(const CurationRecord& r) {
    return {{"observation_id", r.observation_id},
            {"curator", r.curator},
            {"verdict", to_string(r.verdict)},
            {"corrected_boxes", r.corrected_boxes ? boxes_to_json(*r.corrected_boxes) : ordered_json(nullptr)},
            {"feedback_text", opt(r.feedback_text)},
            {"decided_at", r.decided_at},
            {"sequence", r.sequence}};
}

CurationRecord record_from_json(const ordered_json& j) {
    CurationRecord r;
    r.observation_id = j.at("observation_id").get<std::string>();
    r.curator = j.at("curator").get<std::string>();
    auto verdict = j.at("verdict").get<std::string>();
    r.verdict = required_enum(parse_verdict(verdict), verdict, "verdict");
    if (!j.at("corrected_boxes").is_null()) r.corrected_boxes = boxes_from_json(j.at("corrected_boxes"));
    r.feedback_text = opt_string(j, "feedback_text");
    r.decided_at = j.at("decided_at").get<std::string>();
    r.sequence = j.at("sequence").get<std::uint64_t>();
    return r;
}

ordered_json feedback_to_json(const Feedback& f) {
    auto history = ordered_json::array();
    for (const auto& r : f.history) history.push_back(record_to_json(r));
    return {{"observation_id", f.observation_id},
            {"status", f.active ? std::string(to_string(f.active->verdict)) : std::string("pending")},
            {"active", f.active ? record_to_json(*f.active) : ordered_json(nullptr)},
            {"history", std::move(history)}};
}

ordered_json receipt_to_json(const Receipt& r) {
    return {{"observation_id", r.observation_id}, {"stored_checksum", r.stored_checksum}, {"replayed", r.replayed}};
}

}  // namespace fieldlens::service::detail
