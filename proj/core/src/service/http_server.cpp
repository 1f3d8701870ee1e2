#include "reefseg/service/http_server.hpp"

#include <charconv>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "reefseg/error.hpp"

namespace reefseg::service {
namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw HttpError(400, "request body is not valid JSON", json::array({e.what()}));
    }
}

std::size_t size_param(const httplib::Request& req, const std::string& name, std::size_t fallback) {
    if (!req.has_param(name)) return fallback;
    const auto text = req.get_param_value(name);
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw HttpError(422, "invalid query parameter", json::array({name + " must be a non-negative integer"}));
    }
    return value;
}

std::string string_param(const httplib::Request& req, const std::string& name, const std::string& fallback) {
    return req.has_param(name) ? req.get_param_value(name) : fallback;
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps exceptions onto the {"error", "details"} body.
Handler guarded(Handler inner) {
    return [inner = std::move(inner)](const httplib::Request& req, httplib::Response& res) {
        try {
            inner(req, res);
        } catch (const HttpError& e) {
            send_json(res, e.status(), e.body());
        } catch (const ConfigError& e) {
            send_json(res, 422, {{"error", "invalid configuration"}, {"details", e.problems()}});
        } catch (const Error& e) {
            send_json(res, 400, {{"error", e.what()}, {"details", json::array()}});
        } catch (const std::exception& e) {
            send_json(res, 500, {{"error", "internal error"}, {"details", json::array({e.what()})}});
        }
    };
}

json job_summary(const Job& job) { return job.to_json(); }

}  // namespace

void apply_environment(ServerOptions& server, ServiceOptions& service) {
    if (const char* root = std::getenv("REEFSEG_DATA_ROOT"); root && *root) service.data_root = root;
    if (const char* bind = std::getenv("REEFSEG_BIND"); bind && *bind) {
        const std::string text = bind;
        const auto colon = text.rfind(':');
        if (colon == std::string::npos) throw ConfigError({"REEFSEG_BIND must be host:port, got '" + text + "'"});
        server.host = text.substr(0, colon);
        try {
            server.port = std::stoi(text.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError({"REEFSEG_BIND port is not a number: '" + text + "'"});
        }
    }
}

struct HttpServer::Impl {
    Service& service;
    ServerOptions options;
    httplib::Server server;
    std::thread thread;

    Impl(Service& s, ServerOptions o) : service(s), options(std::move(o)) { routes(); }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
        server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

        server.Post("/datasets", guarded([this](const httplib::Request& req, httplib::Response& res) {
            Dataset ds;
            if (req.is_multipart_form_data()) {
                if (!req.has_file("mosaic")) throw HttpError(400, "multipart upload needs a 'mosaic' part");
                std::optional<std::string> bathy;
                if (req.has_file("bathymetry")) bathy = req.get_file_value("bathymetry").content;
                ds = service.add_dataset_from_bytes(req.get_file_value("mosaic").content, bathy);
            } else {
                ds = service.add_dataset(parse_body(req));
            }
            send_json(res, 201, ds.to_json());
        }));

        server.Get(R"(/datasets/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, service.dataset(req.matches[1]).to_json());
        }));

        server.Get(R"(/datasets/([^/]+)/curves)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto doc = service.dataset_curves(req.matches[1], string_param(req, "method", "kmeans"),
                                                    size_param(req, "kmin", 1), size_param(req, "kmax", 10),
                                                    string_param(req, "normalization", "minmax"),
                                                    string_param(req, "mode", "benthic"));
            send_json(res, 200, doc);
        }));

        server.Post("/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto id = service.submit_job(parse_body(req));
            send_json(res, 202, {{"job_id", id}});
        }));

        server.Get("/jobs", guarded([this](const httplib::Request&, httplib::Response& res) {
            auto list = json::array();
            for (const auto& job : service.jobs()) list.push_back(job_summary(job));
            send_json(res, 200, list);
        }));

        server.Get(R"(/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, service.job(req.matches[1]).to_json());
        }));

        server.Get(R"(/jobs/([^/]+)/map\.png)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto bytes = service.job_map_png(req.matches[1]);
            res.status = 200;
            res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
        }));

        server.Get(R"(/jobs/([^/]+)/clusters)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, service.job_clusters(req.matches[1]));
        }));

        server.Post(R"(/jobs/([^/]+)/refine)", guarded([this](const httplib::Request& req, httplib::Response& res) {
            const auto rid = service.refine(req.matches[1], parse_body(req));
            send_json(res, 201, {{"job_id", std::string(req.matches[1])}, {"revision_id", rid}});
        }));

        server.Get(R"(/jobs/([^/]+)/revisions/([^/]+)/export)",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       send_json(res, 200, service.export_revision(req.matches[1], req.matches[2]));
                   }));

        server.Get(R"(/jobs/([^/]+)/revisions/([^/]+)/files/([^/]+))",
                   guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string name = req.matches[3];
                       const auto bytes = service.revision_file(req.matches[1], req.matches[2], name);
                       const char* type = name.ends_with(".png")    ? "image/png"
                                          : name.ends_with(".json") ? "application/json"
                                                                    : "application/octet-stream";
                       res.status = 200;
                       res.set_content(std::string(bytes.begin(), bytes.end()), type);
                   }));

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.status == 404 && res.body.empty()) {
                send_json(res, 404, {{"error", "not found"}, {"details", json::array()}});
            }
        });
    }
};

HttpServer::HttpServer(Service& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    int port = impl_->options.port;
    if (port == 0) {
        port = impl_->server.bind_to_any_port(impl_->options.host);
    } else if (!impl_->server.bind_to_port(impl_->options.host, port)) {
        port = -1;
    }
    if (port < 0) {
        throw IoError("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    }
    impl_->options.port = port;
    return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

int HttpServer::start_background() {
    const int port = bind();
    impl_->thread = std::thread([this] { listen(); });
    impl_->server.wait_until_ready();
    return port;
}

void HttpServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace reefseg::service
