#pragma once

#include <memory>
#include <string>

#include "reefseg/service/service.hpp"

namespace reefseg::service {

struct ServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  ///< 0 picks a free port
    std::string cors_origin = "*";
};

/// Reads REEFSEG_BIND ("host:port") and REEFSEG_DATA_ROOT over the given defaults.
void apply_environment(ServerOptions& server, ServiceOptions& service);

/// HTTP/1.1 JSON front end for a Service.
class HttpServer {
public:
    HttpServer(Service& service, ServerOptions options);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds the socket; returns the bound port. Throws IoError on failure.
    int bind();
    /// Serves until stop(); call bind() first.
    void listen();
    /// bind() and listen() on a background thread.
    int start_background();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace reefseg::service
