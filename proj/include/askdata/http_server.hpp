#pragma once

#include <memory>
#include <string>

#include "askdata/service.hpp"

namespace askdata {

/// HTTP status for an error kind.
int http_status(ErrorKind kind);

/// JSON API under /v1:
///   POST /v1/sessions                      {domain_id}
///   POST /v1/sessions/{id}/messages        {question}
///   POST /v1/sessions/{id}/feedback        {turn_index, corrected_sql}
///   GET  /v1/traces/{id}
///   GET  /v1/health
/// The caller is named by the X-User-Id header.
class HttpServer {
public:
    explicit HttpServer(std::shared_ptr<Service> service);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Port actually bound; 0 picks a free one. Throws Io.
    int bind(const std::string& host, int port = 0);
    /// Serves until stop(); call after bind().
    void serve();
    void stop();
    /// Blocks until the listener accepts connections.
    void wait_until_ready() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace askdata
