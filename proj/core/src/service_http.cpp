// SPDX-License-Identifier: Apache-2.0
#include "esforge/errors.hpp"
#include "esforge/service.hpp"

#include <httplib.h>

namespace esforge {

using nlohmann::json;

struct HttpServer::Impl {
    explicit Impl(SessionService& s) : service(s) {}

    SessionService& service;
    httplib::Server server;
    std::thread worker;
    bool bound = false;
};

namespace {

void reply(httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(-1, ' ', false, json::error_handler_t::replace), "application/json");
}

json parse_body(const httplib::Request& req, httplib::Response& res, bool& ok) {
    ok = true;
    if (req.body.empty()) return json::object();
    auto j = json::parse(req.body, nullptr, false);
    if (j.is_discarded()) {
        ok = false;
        reply(res, {400, json{{"error", "malformed JSON body"}}});
    }
    return j;
}

}  // namespace

HttpServer::HttpServer(SessionService& service) : impl_(std::make_unique<Impl>(service)) {
    auto& srv = impl_->server;
    auto& svc = impl_->service;
    const std::string origin = svc.options().cors_origin;

    srv.set_post_routing_handler([origin](const httplib::Request&, httplib::Response& res) {
        if (origin.empty()) return;
        res.set_header("Access-Control-Allow-Origin", origin);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
    srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    srv.Post("/sessions", [&svc](const httplib::Request& req, httplib::Response& res) {
        bool ok;
        const auto body = parse_body(req, res, ok);
        if (ok) reply(res, svc.create_session(body));
    });
    srv.Post(R"(/sessions/([^/]+)/messages)", [&svc](const httplib::Request& req, httplib::Response& res) {
        bool ok;
        const auto body = parse_body(req, res, ok);
        if (ok) reply(res, svc.post_message(req.matches[1], body));
    });
    srv.Post(R"(/sessions/([^/]+)/rating)", [&svc](const httplib::Request& req, httplib::Response& res) {
        bool ok;
        const auto body = parse_body(req, res, ok);
        if (ok) reply(res, svc.submit_rating(req.matches[1], body));
    });
    srv.Get(R"(/sessions/([^/]+)/export)", [&svc](const httplib::Request& req, httplib::Response& res) {
        reply(res, svc.export_session(req.matches[1]));
    });
    srv.Get("/strategies", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.strategies()); });
    srv.Get("/healthz", [&svc](const httplib::Request&, httplib::Response& res) { reply(res, svc.health()); });

    const auto& ui = svc.options().ui_dir;
    if (!ui.empty() && !srv.set_mount_point("/", ui.string()))
        throw ConfigError("ui_dir does not exist: " + ui.string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    auto& srv = impl_->server;
    int bound = port;
    if (port == 0) {
        bound = srv.bind_to_any_port(host);
    } else if (!srv.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound <= 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    impl_->bound = true;
    return bound;
}

void HttpServer::listen() {
    if (!impl_->bound) throw Error("HttpServer::listen called before bind");
    impl_->server.listen_after_bind();
}

void HttpServer::start() {
    if (!impl_->bound) throw Error("HttpServer::start called before bind");
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace esforge
