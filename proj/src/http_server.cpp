#include "askdata/http_server.hpp"

#include <httplib.h>

#include "askdata/error.hpp"

namespace askdata {

int http_status(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument:
        case ErrorKind::NotParsed: return 400;
        case ErrorKind::Forbidden: return 403;
        case ErrorKind::NotFound:
        case ErrorKind::UnknownDomain:
        case ErrorKind::UnknownTable: return 404;
        case ErrorKind::Busy: return 409;
        case ErrorKind::ProviderUnavailable: return 502;
        case ErrorKind::Timeout: return 504;
        default: return 500;
    }
}

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
    send_json(res, http_status(kind), {{"error", std::string(to_string(kind))}, {"message", message}});
}

std::string user_of(const httplib::Request& req) {
    auto user = req.get_header_value("X-User-Id");
    if (trim(user).empty()) throw Error(ErrorKind::InvalidArgument, "missing X-User-Id header");
    return user;
}

nlohmann::json body_of(const httplib::Request& req) {
    try {
        auto j = nlohmann::json::parse(req.body);
        if (!j.is_object()) throw Error(ErrorKind::InvalidArgument, "body must be a JSON object");
        return j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("malformed JSON body: ") + e.what());
    }
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const Error& e) {
            send_error(res, e.kind(), e.what());
        } catch (const nlohmann::json::exception& e) {
            send_error(res, ErrorKind::InvalidArgument, e.what());
        } catch (const std::exception& e) {
            send_error(res, ErrorKind::Internal, e.what());
        }
    };
}

}  // namespace

struct HttpServer::Impl {
    std::shared_ptr<Service> service;
    httplib::Server server;
};

HttpServer::HttpServer(std::shared_ptr<Service> service) : impl_(std::make_unique<Impl>()) {
    impl_->service = std::move(service);
    auto& svc = impl_->service;
    auto& srv = impl_->server;

    srv.Post("/v1/sessions", guarded([svc](const httplib::Request& req, httplib::Response& res) {
                 auto user = user_of(req);
                 auto body = body_of(req);
                 auto domain = body.at("domain_id").get<std::string>();
                 auto id = svc->create_session(user, domain);
                 send_json(res, 201, {{"session_id", id}, {"user_id", user}, {"domain_id", domain}, {"turns", 0}});
             }));

    srv.Post(R"(/v1/sessions/([0-9a-f]+)/messages)",
             guarded([svc](const httplib::Request& req, httplib::Response& res) {
                 auto user = user_of(req);
                 auto body = body_of(req);
                 std::string id = req.matches[1];
                 std::size_t turn_index = 0;
                 auto outcome = svc->post_message(id, user, body.at("question").get<std::string>(), &turn_index);
                 auto j = outcome.to_json();
                 j["turn_index"] = turn_index;
                 send_json(res, 200, j);
             }));

    srv.Post(R"(/v1/sessions/([0-9a-f]+)/feedback)",
             guarded([svc](const httplib::Request& req, httplib::Response& res) {
                 auto user = user_of(req);
                 auto body = body_of(req);
                 auto index = body.at("turn_index").get<long long>();
                 if (index < 0) throw Error(ErrorKind::InvalidArgument, "turn_index is negative");
                 auto result = svc->post_feedback(req.matches[1], user, static_cast<std::size_t>(index),
                                                  body.at("corrected_sql").get<std::string>());
                 send_json(res, result.accepted ? 200 : 422, result.to_json());
             }));

    srv.Get(R"(/v1/traces/([0-9a-f]+))", guarded([svc](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, svc->get_trace(req.matches[1]).to_json());
            }));

    srv.Get("/v1/health", guarded([svc](const httplib::Request&, httplib::Response& res) {
                send_json(res, 200,
                          {{"status", "ok"},
                           {"sessions", svc->session_count()},
                           {"memory_size", svc->pipeline().store().size()}});
            }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::serve() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace askdata
