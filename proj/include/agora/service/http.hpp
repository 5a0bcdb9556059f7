#pragma once

#include <memory>
#include <string>

#include "agora/service/service.hpp"

namespace httplib {
class Server;
}

namespace agora::service {

/// HTTP status for a service error.
int http_status(ErrorCode code);
/// {"error": {"code", "message", "details"?}}
json error_body(const Error& e);

/// REST API plus server-sent event streams for participants and monitors.
/// Researcher routes require "Authorization: Bearer <token>".
class HttpServer {
public:
    explicit HttpServer(SessionService& service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Blocks until stop().
    void listen();
    void stop();

private:
    void routes();

    SessionService& service_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace agora::service
