#pragma once

#include <map>
#include <memory>
#include <string>

#include "fieldlens/service.hpp"

namespace fieldlens::service {

struct ApiPart {
    std::string content;
    std::string content_type;
    std::string filename;
};

/// Transport-neutral request. Header names are lower-case.
struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> headers;
    std::map<std::string, std::string> query;
    std::string body;
    std::map<std::string, ApiPart> parts;
};

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";
};

inline constexpr std::string_view kIdempotencyHeader = "idempotency-key";

int http_status(ErrorCode code);
/// `{"error": {"code": ..., "message": ...}}` with the mapped status.
ApiResponse error_response(const Error& e);

/// Routes the service endpoints:
///   POST /accounts, POST /tokens, POST /projects,
///   POST /projects/{id}/observations   multipart parts `metadata` and `media`
///   POST /observations/{id}/curation
///   GET  /projects/{id}/retraining-export?since=&modes=
///   GET  /observations/{id}/feedback
///   GET  /health
class ApiRouter {
public:
    explicit ApiRouter(Service& service) : service_(service) {}
    ApiResponse handle(const ApiRequest& request) const;

private:
    Service& service_;
};

/// Blocking HTTP server around ApiRouter.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    /// Binds `host:port`; port 0 picks a free one. Returns the bound port or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    bool listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace fieldlens::service
