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

#pragma once

#include <memory>
#include <optional>
#include <string>

#include "sceneagent/service/service.hpp"

namespace sceneagent::service {

/// JSON over HTTP for a Service:
///   POST /v1/sessions                       -> 201
///   POST /v1/sessions/{id}/ask              {"question"}
///   POST /v1/sessions/{id}/scenegraph
///   POST /v1/sessions/{id}/graphql-query    {"query"}
///   GET  /v1/sessions/{id}/graph
///   GET  /v1/traces/{trace_ref}
///   GET  /v1/health
/// Failures answer {"error": {"code", "message", "detail"}}.
class HttpServer {
public:
    /// With a bearer token, every route except /v1/health requires
    /// "Authorization: Bearer <token>".
    explicit HttpServer(Service& service, std::optional<std::string> bearer_token = std::nullopt);
    ~HttpServer();
    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds (port 0 picks a free port) and serves on a background thread.
    /// Returns the bound port.
    int start(const std::string& host, int port);
    /// Binds and serves on the calling thread until stop().
    void run(const std::string& host, int port);
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace sceneagent::service
