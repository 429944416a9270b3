#include <httplib.h>

#include <regex>

#include "codec.hpp"
#include "fieldlens/annotations.hpp"
#include "fieldlens/service_http.hpp"
#include "fieldlens/text.hpp"
#include "fieldlens/timeutil.hpp"

namespace fieldlens::service {

using detail::ordered_json;

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::Unauthenticated:
        case ErrorCode::InvalidCredentials: return 401;
        case ErrorCode::Forbidden: return 403;
        case ErrorCode::UnknownProject:
        case ErrorCode::UnknownObservation: return 404;
        case ErrorCode::EmailTaken: return 409;
        case ErrorCode::PayloadTooLarge: return 413;
        case ErrorCode::ValidationFailed:
        case ErrorCode::WeakCredential:
        case ErrorCode::InvalidEmail: return 422;
        case ErrorCode::ParseError: return 400;
        case ErrorCode::UnsupportedSignIn: return 501;
        default: return 500;
    }
}

ApiResponse error_response(const Error& e) {
    ordered_json j{{"error", {{"code", to_string(e.code)}, {"message", e.message}}}};
    return {http_status(e.code), j.dump() + "\n"};
}

namespace {

ApiResponse json_response(int status, const ordered_json& j) { return {status, j.dump() + "\n"}; }

Error bad_request(const std::string& m) { return make_error(ErrorCode::ParseError, m); }

std::string bearer(const ApiRequest& r) {
    auto it = r.headers.find("authorization");
    if (it == r.headers.end()) return {};
    std::string_view v = it->second;
    if (v.size() > 7 && fold_key(v.substr(0, 7)) == "bearer") return trim(v.substr(7));
    return {};
}

std::optional<std::string> opt_field(const ordered_json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<std::string>();
}

template <typename T>
ApiResponse reply(const Result<T>& r, int status, ordered_json (*render)(const T&)) {
    if (!r) return error_response(r.error());
    return json_response(status, render(*r));
}

ApiResponse post_accounts(Service& s, const ApiRequest& req) {
    auto j = ordered_json::parse(req.body);
    auto method_text = j.value("method", std::string("email_password"));
    auto method = parse_sign_in_method(method_text);
    if (!method) return error_response(make_error(ErrorCode::ValidationFailed, "unknown sign-in method " + method_text));
    auto role_text = j.value("role", std::string("participant"));
    auto role = parse_role(role_text);
    if (!role) return error_response(make_error(ErrorCode::ValidationFailed, "unknown role " + role_text));
    auto reg = s.register_account(*method, opt_field(j, "email"), opt_field(j, "credential"), *role);
    if (!reg) return error_response(reg.error());
    auto out = detail::account_to_json(reg->account);
    if (reg->token) out["token"] = *reg->token;
    return json_response(201, out);
}

ApiResponse post_tokens(Service& s, const ApiRequest& req) {
    auto j = ordered_json::parse(req.body);
    auto t = s.issue_token(j.value("email", std::string()), j.value("credential", std::string()));
    if (!t) return error_response(t.error());
    return json_response(201, {{"token", t->token},
                               {"account_id", t->account_id},
                               {"role", to_string(t->role)},
                               {"expires_at", t->expires_at}});
}

ApiResponse post_projects(Service& s, const ApiRequest& req) {
    auto token = bearer(req);
    if (auto who = s.authenticate(token); !who) return error_response(who.error());
    auto j = ordered_json::parse(req.body);
    auto task_text = j.value("task", std::string("detection"));
    auto task = domain::parse_task(task_text);
    if (!task) return error_response(make_error(ErrorCode::ValidationFailed, "unknown task " + task_text));
    domain::LabelMap labels{j.value("label_map", std::vector<std::string>{})};
    return reply(s.create_project(token, j.value("name", std::string()), *task, std::move(labels)), 201,
                 detail::project_to_json);
}

ApiResponse post_observation(Service& s, const ApiRequest& req, const std::string& project_id) {
    auto token = bearer(req);
    if (auto who = s.authenticate(token); !who) return error_response(who.error());
    auto meta = req.parts.find("metadata");
    auto media = req.parts.find("media");
    if (meta == req.parts.end() || media == req.parts.end())
        return error_response(make_error(ErrorCode::ValidationFailed, "multipart parts 'metadata' and 'media' are required"));
    ObservationPayload payload;
    try {
        payload = detail::payload_from_json(ordered_json::parse(meta->second.content));
    } catch (const std::exception& e) {
        return error_response(make_error(ErrorCode::ValidationFailed, std::string("metadata: ") + e.what()));
    }
    if (!media->second.content_type.empty() && payload.media_type == "application/octet-stream")
        payload.media_type = media->second.content_type;
    std::optional<std::string> key;
    if (auto it = req.headers.find(std::string(kIdempotencyHeader)); it != req.headers.end()) key = it->second;
    auto r = s.upload_observation(token, project_id, payload, media->second.content, key);
    if (!r) return error_response(r.error());
    return json_response(r->replayed ? 200 : 201, detail::receipt_to_json(*r));
}

ApiResponse post_curation(Service& s, const ApiRequest& req, const std::string& observation_id) {
    auto token = bearer(req);
    if (auto who = s.authenticate(token); !who) return error_response(who.error());
    auto j = ordered_json::parse(req.body);
    auto verdict_text = j.value("verdict", std::string());
    auto verdict = parse_verdict(verdict_text);
    if (!verdict) return error_response(make_error(ErrorCode::ValidationFailed, "unknown verdict '" + verdict_text + "'"));
    std::optional<std::vector<domain::BoundingBox>> boxes;
    try {
        if (j.contains("corrected_boxes") && !j.at("corrected_boxes").is_null())
            boxes = detail::boxes_from_json(j.at("corrected_boxes"));
    } catch (const std::exception& e) {
        return error_response(make_error(ErrorCode::ValidationFailed, std::string("corrected_boxes: ") + e.what()));
    }
    return reply(s.curate_observation(token, observation_id, *verdict, std::move(boxes), opt_field(j, "feedback")), 201,
                 detail::record_to_json);
}

ApiResponse get_export(Service& s, const ApiRequest& req, const std::string& project_id) {
    ExportFilter filter;
    if (auto it = req.query.find("since"); it != req.query.end() && !it->second.empty()) {
        auto t = parse_iso8601(it->second);
        if (!t) return error_response(make_error(ErrorCode::ValidationFailed, "since must be an ISO-8601 time"));
        filter.since = *t;
    }
    if (auto it = req.query.find("modes"); it != req.query.end() && !it->second.empty()) {
        filter.modes.emplace();
        for (const auto& m : split(it->second, ',')) {
            auto mode = parse_mode(m);
            if (!mode) return error_response(make_error(ErrorCode::ValidationFailed, "unknown mode '" + m + "'"));
            filter.modes->insert(*mode);
        }
    }
    auto ex = s.export_retraining_set(bearer(req), project_id, filter);
    if (!ex) return error_response(ex.error());
    auto docs = annotations::export_set(ex->set, annotations::FormatTag::coco_json);
    if (!docs) return error_response(docs.error());
    auto media = ordered_json::array();
    for (const auto& m : ex->media)
        media.push_back({{"media_id", m.media_id}, {"media_ref", m.media_ref}, {"checksum", m.checksum}, {"media_type", m.media_type}});
    return json_response(200, {{"project_id", project_id},
                               {"task", domain::to_string(ex->set.task)},
                               {"image_count", ex->set.images.size()},
                               {"coco", ordered_json::parse(docs->front().text)},
                               {"media", std::move(media)}});
}

ApiResponse get_feedback(Service& s, const ApiRequest& req, const std::string& observation_id) {
    return reply(s.feedback(bearer(req), observation_id), 200, detail::feedback_to_json);
}

}  // namespace

ApiResponse ApiRouter::handle(const ApiRequest& req) const {
    static const std::regex observations(R"(^/projects/([^/]+)/observations$)");
    static const std::regex curation(R"(^/observations/([^/]+)/curation$)");
    static const std::regex export_path(R"(^/projects/([^/]+)/retraining-export$)");
    static const std::regex feedback(R"(^/observations/([^/]+)/feedback$)");
    std::smatch m;
    try {
        if (req.method == "POST") {
            if (req.path == "/accounts") return post_accounts(service_, req);
            if (req.path == "/tokens") return post_tokens(service_, req);
            if (req.path == "/projects") return post_projects(service_, req);
            if (std::regex_match(req.path, m, observations)) return post_observation(service_, req, m[1]);
            if (std::regex_match(req.path, m, curation)) return post_curation(service_, req, m[1]);
        } else if (req.method == "GET") {
            if (req.path == "/health") return json_response(200, {{"status", "ok"}});
            if (std::regex_match(req.path, m, export_path)) return get_export(service_, req, m[1]);
            if (std::regex_match(req.path, m, feedback)) return get_feedback(service_, req, m[1]);
        }
    } catch (const nlohmann::json::exception& e) {
        return error_response(bad_request(std::string("malformed JSON body: ") + e.what()));
    }
    ordered_json j{{"error", {{"code", "NOT_FOUND"}, {"message", req.method + " " + req.path + " is not an endpoint"}}}};
    return json_response(404, j);
}

struct HttpServer::Impl {
    Service& service;
    ApiRouter router;
    httplib::Server server;

    explicit Impl(Service& s) : service(s), router(s) {}
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
    auto handler = [this](const httplib::Request& in, httplib::Response& out) {
        ApiRequest req;
        req.method = in.method;
        req.path = in.path;
        for (const auto& [k, v] : in.headers) req.headers[fold_key(k)] = v;
        for (const auto& [k, v] : in.params) req.query[k] = v;
        req.body = in.body;
        for (const auto& [name, part] : in.files) req.parts[name] = {part.content, part.content_type, part.filename};
        auto res = impl_->router.handle(req);
        out.status = res.status;
        out.set_content(res.body, res.content_type);
    };
    // headroom over the media cap for the metadata part and multipart framing
    impl_->server.set_payload_max_length(service.config().media_cap_bytes + 1024 * 1024);
    impl_->server.Post(".*", handler);
    impl_->server.Get(".*", handler);
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace fieldlens::service
