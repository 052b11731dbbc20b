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

#include <gtest/gtest.h>

#include "httplib.h"
#include "sceneagent/service/http.hpp"
#include "sceneagent/service/service.hpp"
#include "support.hpp"

namespace sceneagent::service {
namespace {

using nlohmann::json;

class HttpFixture : public ::testing::Test {
protected:
    void SetUp() override { start(std::nullopt); }

    void start(std::optional<std::string> token) {
        server_.reset();
        service_ = std::make_unique<Service>(ServiceConfig{}, testing::rule_client([](const backend::ChatRequest& req) {
                                                 return testing::clinic_reply(req, true);
                                             }));
        server_ = std::make_unique<HttpServer>(*service_, std::move(token));
        port_ = server_->start("127.0.0.1", 0);
        client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    }

    void TearDown() override { server_.reset(); }

    httplib::Result post(const std::string& path, const json& body, const httplib::Headers& headers = {}) {
        return client_->Post(path, headers, body.dump(), "application/json");
    }

    std::string create(std::int64_t budget = 50) {
        auto r = post("/v1/sessions", {{"manifest_path", manifest_.string()}, {"budget", budget}});
        EXPECT_TRUE(r);
        EXPECT_EQ(r->status, 201);
        return json::parse(r->body).at("session_id").get<std::string>();
    }

    static json error_of(const httplib::Result& r) { return json::parse(r->body).at("error"); }

    testing::TempDir dir_;
    std::filesystem::path manifest_ = testing::write_video(dir_ / "video", {0, 200});
    std::unique_ptr<Service> service_;
    std::unique_ptr<HttpServer> server_;
    std::unique_ptr<httplib::Client> client_;
    int port_ = 0;
};

TEST_F(HttpFixture, Health) {
    auto r = client_->Get("/v1/health");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(json::parse(r->body).at("status"), "ok");
}

TEST_F(HttpFixture, CreateSessions) {
    const auto a = create();
    const auto b = create();
    EXPECT_NE(a, b);
    auto bad = post("/v1/sessions", {{"manifest_path", (dir_ / "nope.json").string()}});
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    EXPECT_EQ(error_of(bad).at("code"), "bad_request");
    auto junk = client_->Post("/v1/sessions", "{not json", "application/json");
    ASSERT_TRUE(junk);
    EXPECT_EQ(junk->status, 400);
}

TEST_F(HttpFixture, AskAndFetchTrace) {
    const auto id = create();
    auto r = post("/v1/sessions/" + id + "/ask", {{"question", "Which instrument touched the tissue last?"}});
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200) << r->body;
    const auto body = json::parse(r->body);
    EXPECT_EQ(body.at("answer"), "forceps");
    auto t = client_->Get("/v1/traces/" + body.at("trace_ref").get<std::string>());
    ASSERT_TRUE(t);
    EXPECT_EQ(t->status, 200);
    EXPECT_EQ(json::parse(t->body).at("answer"), "forceps");

    auto missing = post("/v1/sessions/nope/ask", {{"question", "q"}});
    ASSERT_TRUE(missing);
    EXPECT_EQ(missing->status, 404);
    EXPECT_EQ(error_of(missing).at("code"), "not_found");
    auto no_question = post("/v1/sessions/" + id + "/ask", json::object());
    EXPECT_EQ(no_question->status, 400);
}

TEST_F(HttpFixture, BudgetExhaustedIs429) {
    const auto id = create(0);
    auto r = post("/v1/sessions/" + id + "/ask", {{"question", "q"}});
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 429);
    EXPECT_EQ(error_of(r).at("code"), "budget_exceeded");
}

TEST_F(HttpFixture, SceneGraphThenQuery) {
    const auto id = create();
    auto early = post("/v1/sessions/" + id + "/graphql-query", {{"query", "COUNT (a)-[r]->(b)"}});
    ASSERT_TRUE(early);
    EXPECT_EQ(early->status, 409);
    EXPECT_EQ(error_of(early).at("code"), "conflict");

    auto g = post("/v1/sessions/" + id + "/scenegraph", json::object());
    ASSERT_TRUE(g);
    ASSERT_EQ(g->status, 200) << g->body;
    EXPECT_EQ(json::parse(g->body).at("warnings"), json::array());

    auto q = post("/v1/sessions/" + id + "/graphql-query",
                  {{"query", "MATCH (a:instrument)-[r:contacts]->(b:tissue_region) RETURN a LATEST"}});
    ASSERT_TRUE(q);
    ASSERT_EQ(q->status, 200) << q->body;
    EXPECT_EQ(json::parse(q->body).at("rows").at(0).at("a"), "forceps@f1");

    auto bad = post("/v1/sessions/" + id + "/graphql-query", {{"query", "MATCH (a)-[r->(b) RETURN a"}});
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    EXPECT_EQ(error_of(bad).at("detail").at("offset"), 13);

    auto graph = client_->Get("/v1/sessions/" + id + "/graph");
    ASSERT_TRUE(graph);
    EXPECT_EQ(graph->status, 200);
    EXPECT_EQ(json::parse(graph->body).at("version"), 1);
}

TEST_F(HttpFixture, ReadsLeaveStateAlone) {
    const auto id = create();
    post("/v1/sessions/" + id + "/scenegraph", json::object());
    const auto before = service_->state_digest();
    client_->Get("/v1/sessions/" + id + "/graph");
    client_->Get("/v1/health");
    client_->Get("/v1/traces/whatever");
    client_->Get("/v1/sessions/missing/graph");
    EXPECT_EQ(service_->state_digest(), before);
}

TEST_F(HttpFixture, UnknownRouteHasClosedCode) {
    auto r = client_->Get("/v2/anything");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 404);
    EXPECT_EQ(error_of(r).at("code"), "not_found");
}

TEST_F(HttpFixture, BearerToken) {
    start(std::string("s3cret"));
    auto health = client_->Get("/v1/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    auto denied = post("/v1/sessions", {{"manifest_path", manifest_.string()}});
    ASSERT_TRUE(denied);
    EXPECT_EQ(denied->status, 400);
    EXPECT_EQ(error_of(denied).at("detail").at("error_code"), "unauthorized");
    auto allowed = post("/v1/sessions", {{"manifest_path", manifest_.string()}}, {{"Authorization", "Bearer s3cret"}});
    ASSERT_TRUE(allowed);
    EXPECT_EQ(allowed->status, 201);
}

}  // namespace
}  // namespace sceneagent::service
