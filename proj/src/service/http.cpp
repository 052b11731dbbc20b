// Copyright 2026 The SceneAgent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sceneagent/service/http.hpp"

#include <thread>

#include "httplib.h"

namespace sceneagent::service {

using nlohmann::json;

struct HttpServer::Impl {
    Service& service;
    std::optional<std::string> token;
    httplib::Server server;
    std::thread thread;

    Impl(Service& s, std::optional<std::string> t) : service(s), token(std::move(t)) {}
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const ApiError& e) { send_json(res, http_status(e.code()), e.to_json()); }

json parse_body(const httplib::Request& req, bool allow_empty) {
    if (req.body.empty() && allow_empty) return json::object();
    try {
        auto doc = json::parse(req.body);
        if (!doc.is_object()) throw ApiError(ApiCode::bad_request, "body must be a JSON object");
        return doc;
    } catch (const json::exception& e) {
        throw ApiError(ApiCode::bad_request, std::string("invalid JSON body: ") + e.what());
    }
}

std::string string_field(const json& body, const char* key) {
    if (!body.contains(key) || !body[key].is_string()) {
        throw ApiError(ApiCode::bad_request, std::string("body needs a string field \"") + key + "\"");
    }
    return body[key].get<std::string>();
}

}  // namespace

HttpServer::HttpServer(Service& service, std::optional<std::string> bearer_token)
    : impl_(std::make_unique<Impl>(service, std::move(bearer_token))) {
    auto& srv = impl_->server;
    Impl* impl = impl_.get();

    // Every handler runs through here so failures always carry a closed code.
    auto wrap = [impl](auto fn, bool public_route = false) {
        return [impl, fn, public_route](const httplib::Request& req, httplib::Response& res) {
            try {
                if (impl->token && !public_route && req.get_header_value("Authorization") != "Bearer " + *impl->token) {
                    throw ApiError(ApiCode::bad_request, "missing or wrong bearer token", {{"error_code", "unauthorized"}});
                }
                fn(req, res);
            } catch (const ApiError& e) {
                send_error(res, e);
            } catch (const Error& e) {
                send_error(res, to_api_error(e));
            } catch (const std::exception& e) {
                send_error(res, ApiError(ApiCode::bad_request, e.what()));
            }
        };
    };

    srv.Post("/v1/sessions", wrap([impl](const httplib::Request& req, httplib::Response& res) {
                 send_json(res, 201, impl->service.create_session(parse_body(req, false)));
             }));
    srv.Post(R"(/v1/sessions/([^/]+)/ask)", wrap([impl](const httplib::Request& req, httplib::Response& res) {
                 const auto body = parse_body(req, false);
                 send_json(res, 200, impl->service.ask(req.matches[1], string_field(body, "question")));
             }));
    srv.Post(R"(/v1/sessions/([^/]+)/scenegraph)", wrap([impl](const httplib::Request& req, httplib::Response& res) {
                 parse_body(req, true);
                 send_json(res, 200, impl->service.generate_scene_graph(req.matches[1]));
             }));
    srv.Post(R"(/v1/sessions/([^/]+)/graphql-query)", wrap([impl](const httplib::Request& req, httplib::Response& res) {
                 const auto body = parse_body(req, false);
                 send_json(res, 200, impl->service.graph_query(req.matches[1], string_field(body, "query")));
             }));
    srv.Get(R"(/v1/sessions/([^/]+)/graph)", wrap([impl](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, impl->service.get_graph(req.matches[1]));
            }));
    srv.Get(R"(/v1/traces/([^/]+))", wrap([impl](const httplib::Request& req, httplib::Response& res) {
                send_json(res, 200, impl->service.get_trace(req.matches[1]));
            }));
    srv.Get("/v1/health", wrap([impl](const httplib::Request&, httplib::Response& res) {
                send_json(res, 200, impl->service.health());
            }, true));

    srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (!res.body.empty()) return;
        if (res.status == 404) {
            send_error(res, ApiError(ApiCode::not_found, "no such endpoint"));
        } else if (res.status >= 400) {
            const int status = res.status;
            send_error(res, ApiError(ApiCode::bad_request, "request rejected"));
            res.status = status;
        }
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return bound;
}

void HttpServer::run(const std::string& host, int port) {
    if (!impl_->server.bind_to_port(host, port)) {
        throw Error(ErrorCode::io_error, "cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace sceneagent::service
