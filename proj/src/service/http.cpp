#include "agora/service/http.hpp"

#include <httplib.h>

namespace agora::service {

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownSession:
        case ErrorCode::UnknownParticipant:
            return 404;
        case ErrorCode::Unauthorized:
            return 401;
        case ErrorCode::SeatTaken:
        case ErrorCode::WrongPhase:
        case ErrorCode::SeatsNotJoined:
            return 409;
        case ErrorCode::SessionEnded:
            return 410;
        case ErrorCode::StorageFailure:
        case ErrorCode::CorruptLog:
            return 503;
        default:
            return 422;
    }
}

json error_body(const Error& e) {
    json err = {{"code", to_string(e.code())}, {"message", e.detail()}};
    if (auto* r = dynamic_cast<const RequestError*>(&e)) err["details"] = r->details();
    return {{"error", err}};
}

namespace {

void send_json(httplib::Response& res, const json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
}

json body_json(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::InvalidConfig, "request body is not JSON");
    return j;
}

std::string bearer(const httplib::Request& req) {
    const auto h = req.get_header_value("Authorization");
    constexpr std::string_view prefix = "Bearer ";
    return h.rfind(prefix, 0) == 0 ? h.substr(prefix.size()) : std::string();
}

// SSE frames: "id: n\nevent: type\ndata: json\n\n". Comments keep idle
// connections alive; a closed channel ends the stream once drained.
void stream_channel(httplib::Response& res, std::shared_ptr<Channel> ch) {
    res.set_header("Cache-Control", "no-cache");
    res.set_header("X-Accel-Buffering", "no");
    res.set_chunked_content_provider("text/event-stream", [ch](size_t, httplib::DataSink& sink) {
        auto msg = ch->next(std::chrono::milliseconds(1000));
        if (!msg) {
            if (ch->closed()) {
                sink.done();
                return true;
            }
            static const std::string ping = ": ping\n\n";
            return sink.write(ping.data(), ping.size());
        }
        std::string frame = "id: " + std::to_string((*msg)["n"].get<std::int64_t>()) + "\nevent: " +
                            (*msg)["type"].get<std::string>() + "\ndata: " + msg->dump() + "\n\n";
        return sink.write(frame.data(), frame.size());
    });
}

}  // namespace

HttpServer::HttpServer(SessionService& service) : service_(service), server_(std::make_unique<httplib::Server>()) {
    // each SSE client holds a worker for the life of its stream
    server_->new_task_queue = [] { return new httplib::ThreadPool(64); };
    routes();
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return server_->bind_to_any_port(host);
    return server_->bind_to_port(host, port) ? port : -1;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
    if (server_->is_running()) server_->stop();
}

void HttpServer::routes() {
    auto& s = service_;
    using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;
    auto guarded = [](Handler h) {
        return [h](const httplib::Request& req, httplib::Response& res) {
            try {
                h(req, res);
            } catch (const Error& e) {
                send_json(res, error_body(e), http_status(e.code()));
            } catch (const json::exception& e) {
                send_json(res, error_body(Error(ErrorCode::InvalidConfig, e.what())), 422);
            }
        };
    };
    auto researcher = [&s, guarded](Handler h) {
        return guarded([&s, h](const httplib::Request& req, httplib::Response& res) {
            if (!s.researcher_authorized(bearer(req))) throw Error(ErrorCode::Unauthorized, "researcher token required");
            h(req, res);
        });
    };
    auto& srv = *server_;

    srv.Get("/healthz", [](const httplib::Request&, httplib::Response& res) { send_json(res, {{"ok", true}}); });

    srv.Get("/api/paradigms", guarded([&s](auto&, auto& res) { send_json(res, s.list_paradigms()); }));
    srv.Post("/api/paradigms", researcher([&s](const httplib::Request& req, httplib::Response& res) {
                 const bool is_json = req.get_header_value("Content-Type").rfind("application/json", 0) == 0;
                 if (is_json) {
                     auto j = body_json(req);
                     send_json(res, s.upload_template(j.at("ecl").get<std::string>(), j.value("template_id", "")), 201);
                 } else {
                     send_json(res, s.upload_template(req.body, req.get_param_value("id")), 201);
                 }
             }));
    srv.Get("/api/controls/presets", guarded([&s](auto&, auto& res) { send_json(res, s.list_controls_presets()); }));
    srv.Get("/api/personas", guarded([&s](auto&, auto& res) { send_json(res, s.personas()); }));

    srv.Post("/api/sessions", researcher([&s](const httplib::Request& req, httplib::Response& res) {
                 const auto id = s.create_session(create_request_from_json(body_json(req), s.personas()));
                 send_json(res, s.session_info(id), 201);
             }));
    srv.Get("/api/sessions", researcher([&s](auto&, auto& res) { send_json(res, s.list_sessions()); }));
    srv.Get(R"(/api/sessions/(\d+))", researcher([&s](const httplib::Request& req, httplib::Response& res) {
                send_json(res, s.session_info(req.matches[1]));
            }));
    srv.Post(R"(/api/sessions/(\d+)/start)", researcher([&s](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, s.start(req.matches[1], body_json(req).value("force", false)));
             }));
    srv.Post(R"(/api/sessions/(\d+)/end)", researcher([&s](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, s.end(req.matches[1]));
             }));
    srv.Get(R"(/api/sessions/(\d+)/monitor)", researcher([&s](const httplib::Request& req, httplib::Response& res) {
                stream_channel(res, s.monitor(req.matches[1]));
            }));
    srv.Get(R"(/api/sessions/(\d+)/export)", researcher([&s](const httplib::Request& req, httplib::Response& res) {
                const auto format = req.has_param("format") ? req.get_param_value("format") : "raw";
                const std::string id = req.matches[1];
                if (format == "raw") {
                    res.set_header("Content-Disposition", "attachment; filename=\"session-" + id + ".jsonl\"");
                    res.set_content(s.export_raw(id), "application/x-ndjson");
                } else if (format == "flattened") {
                    res.set_header("Content-Disposition", "attachment; filename=\"session-" + id + ".csv\"");
                    res.set_content(s.export_flattened(id), "text/csv");
                } else {
                    throw Error(ErrorCode::InvalidConfig, "format must be raw or flattened");
                }
            }));
    srv.Get(R"(/api/sessions/(\d+)/report)", researcher([&s](const httplib::Request& req, httplib::Response& res) {
                std::optional<std::string> participant;
                if (req.has_param("participant")) participant = req.get_param_value("participant");
                send_json(res, s.report(req.matches[1], participant));
            }));

    // participant routes
    srv.Post(R"(/api/sessions/(\d+)/join)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
                 auto j = body_json(req);
                 auto joined = s.join(req.matches[1], j.at("participant_id").get<std::string>());
                 send_json(res, joined.initial);
             }));
    srv.Get(R"(/api/sessions/(\d+)/participants/([A-Za-z0-9_]+)/stream)",
            guarded([&s](const httplib::Request& req, httplib::Response& res) {
                stream_channel(res, s.join(req.matches[1], req.matches[2]).channel);
            }));
    srv.Post(R"(/api/sessions/(\d+)/participants/([A-Za-z0-9_]+)/actions)",
             guarded([&s](const httplib::Request& req, httplib::Response& res) {
                 auto j = body_json(req);
                 auto r = s.submit(req.matches[1], req.matches[2], j.at("type").get<std::string>(),
                                   j.value("args", json::object()));
                 if (r.event) {
                     send_json(res, {{"event", engine::event_to_json(*r.event)}});
                 } else {
                     json denial = {{"code", to_string(r.denial->code)}, {"message", r.denial->message}};
                     if (!r.denial->policy.empty()) denial["policy"] = r.denial->policy;
                     send_json(res, {{"denial", denial}}, r.denial->code == ErrorCode::StorageFailure ? 503 : 409);
                 }
             }));
}

}  // namespace agora::service
