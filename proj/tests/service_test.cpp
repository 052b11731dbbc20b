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

#include <filesystem>

#include "sceneagent/error.hpp"
#include "sceneagent/graphqa/execute.hpp"
#include "sceneagent/graphqa/query.hpp"
#include "sceneagent/scenegen/graph.hpp"
#include "sceneagent/service/extraction.hpp"
#include "sceneagent/service/service.hpp"
#include "support.hpp"

namespace sceneagent::service {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::string kLatestContact = "MATCH (a:instrument)-[r:contacts]->(b:tissue_region) RETURN a LATEST";

ApiCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ApiError& e) {
        return e.code();
    }
    ADD_FAILURE() << "no ApiError thrown";
    return ApiCode::bad_request;
}

struct World {
    testing::TempDir dir;
    fs::path manifest;

    explicit World(std::vector<std::uint8_t> levels = {0, 200}) {
        manifest = testing::write_video(dir / "video", levels);
    }
    json body(std::int64_t budget = 200) const { return {{"manifest_path", manifest.string()}, {"budget", budget}}; }
};

Service make_service(bool forceps_later = true, std::optional<fs::path> store = std::nullopt) {
    ServiceConfig cfg;
    cfg.store_dir = store;
    return Service(cfg, testing::rule_client([forceps_later](const backend::ChatRequest& req) {
                       return testing::clinic_reply(req, forceps_later);
                   }));
}

// ---- extraction contract --------------------------------------------------------------------

TEST(Extraction, ParsesContractAndRejectsOthers) {
    media::Keyframe kf;
    kf.frame_index = 4;
    kf.timestamp_s = 4.0;
    const scenegen::FrameDims dims{8, 6};
    const auto ok = parse_extraction(
        R"({"caption":"c","entities":[{"label":"Scalpel","bbox":[0,0,4,3],"track_hint":null,"confidence":0.5}],"relations":[["Scalpel","left_of","tray"]]})",
        kf, dims);
    ASSERT_TRUE(ok);
    EXPECT_EQ(ok->keyframe_index, 4u);
    ASSERT_EQ(ok->entities.size(), 1u);
    EXPECT_EQ(ok->entities[0].raw_label, "Scalpel");
    EXPECT_TRUE(ok->entities[0].category.empty());
    EXPECT_EQ(ok->relations.size(), 1u);
    // Outside the frame, zero size, wrong types, prose.
    EXPECT_FALSE(parse_extraction(R"({"caption":"c","entities":[{"label":"x","bbox":[6,0,4,3],"confidence":1}],"relations":[]})", kf, dims));
    EXPECT_FALSE(parse_extraction(R"({"caption":"c","entities":[{"label":"x","bbox":[0,0,0,3],"confidence":1}],"relations":[]})", kf, dims));
    EXPECT_FALSE(parse_extraction(R"({"caption":3,"entities":[],"relations":[]})", kf, dims));
    EXPECT_FALSE(parse_extraction("Sure! Here is the scene.", kf, dims));
}

// ---- sessions -------------------------------------------------------------------------------

TEST(Sessions, CreateFromManifest) {
    World w({0, 0, 0});
    auto svc = make_service();
    const auto r = svc.create_session(w.body());
    EXPECT_GE(r.at("keyframe_count").get<int>(), 1);
    EXPECT_EQ(r.at("frame_count"), 3);
    EXPECT_EQ(r.at("keyframes").at(0).at("frame_index"), 0);
    const auto r2 = svc.create_session(w.body());
    EXPECT_NE(r.at("session_id"), r2.at("session_id"));
}

TEST(Sessions, BrokenManifestIsBadRequest) {
    World w;
    testing::write_text(w.dir / "bad.json", R"({"video_id": "v", "fps": -1, "frames": []})");
    auto svc = make_service();
    EXPECT_EQ(code_of([&] { svc.create_session({{"manifest_path", (w.dir / "bad.json").string()}}); }), ApiCode::bad_request);
    EXPECT_EQ(code_of([&] { svc.create_session({{"manifest_path", (w.dir / "none.json").string()}}); }), ApiCode::bad_request);
    EXPECT_EQ(code_of([&] { svc.create_session(json::object()); }), ApiCode::bad_request);
    EXPECT_EQ(code_of([&] { svc.create_session({{"manifest_path", w.manifest.string()}, {"budget", -3}}); }),
              ApiCode::bad_request);
    EXPECT_EQ(http_status(ApiCode::bad_request), 400);
}

TEST(Ask, FixtureAnswerWithResolvableTrace) {
    World w;
    auto svc = make_service();
    const auto id = svc.create_session(w.body(10)).at("session_id").get<std::string>();
    const auto r = svc.ask(id, "Which instrument touched the tissue last?");
    EXPECT_EQ(r.at("answer"), "forceps");
    EXPECT_EQ(r.at("confidence"), 1.0);
    EXPECT_EQ(r.at("abstained"), false);
    EXPECT_EQ(r.at("calls"), 3);
    EXPECT_EQ(r.at("budget_remaining"), 7);
    const auto trace = svc.get_trace(r.at("trace_ref").get<std::string>());
    EXPECT_EQ(trace.at("kind"), "agent");
    EXPECT_EQ(trace.at("answer"), "forceps");
    EXPECT_EQ(code_of([&] { svc.get_trace("nope"); }), ApiCode::not_found);
}

TEST(Ask, UnknownSessionAndEmptyBudget) {
    World w;
    auto svc = make_service();
    EXPECT_EQ(code_of([&] { svc.ask("s0000", "q?"); }), ApiCode::not_found);
    EXPECT_EQ(http_status(ApiCode::not_found), 404);
    const auto id = svc.create_session(w.body(0)).at("session_id").get<std::string>();
    EXPECT_EQ(code_of([&] { svc.ask(id, "q?"); }), ApiCode::budget_exceeded);
    EXPECT_EQ(http_status(ApiCode::budget_exceeded), 429);
}

TEST(Ask, BudgetConservation) {
    World w;
    auto svc = make_service();
    const auto id = svc.create_session(w.body(5)).at("session_id").get<std::string>();
    EXPECT_EQ(svc.ask(id, "first?").at("calls"), 3);
    // Two calls left: the second question runs out part-way and still leaves a trace.
    std::string ref;
    try {
        svc.ask(id, "second?");
        FAIL();
    } catch (const ApiError& e) {
        EXPECT_EQ(e.code(), ApiCode::budget_exceeded);
        ref = e.detail().at("trace_ref").get<std::string>();
    }
    const auto session = svc.get_session(id);
    EXPECT_EQ(session.at("budget_remaining"), 0);
    // Every call charged to the session appears in exactly one of its traces.
    std::size_t attributed = 0;
    for (const auto& r : session.at("trace_refs")) {
        const auto trace = svc.get_trace(r.get<std::string>());
        for (const auto& step : trace.at("steps")) attributed += step.at("calls").size();
    }
    EXPECT_EQ(attributed, 5u);
    EXPECT_EQ(svc.get_trace(ref).at("incomplete"), true);
}

// ---- scene graphs -----------------------------------------------------------------------------

TEST(SceneGraph, TwoKeyframesScalpelOnTissue) {
    World w;
    auto svc = make_service(false);
    const auto id = svc.create_session(w.body()).at("session_id").get<std::string>();
    const auto r = svc.generate_scene_graph(id);
    EXPECT_EQ(r.at("warnings"), json::array());
    const auto g = scenegen::graph_from_json(r.at("graph"));
    ASSERT_EQ(g.nodes.size(), 2u);
    EXPECT_TRUE(g.nodes.count("scalpel@s1"));
    EXPECT_TRUE(g.nodes.count("tissue_region@t1"));
    bool contact = false;
    for (const auto& [eid, e] : g.edges) {
        if (e.relation == "contacts" && e.src == "scalpel@s1") {
            contact = true;
            EXPECT_EQ(e.t_start, 0u);
            EXPECT_EQ(e.t_end, 1u);
        }
    }
    EXPECT_TRUE(contact);
    EXPECT_EQ(r.at("budget_remaining"), 198);
}

TEST(SceneGraph, MalformedRepliesDegradeToWarnings) {
    World w({0, 200, 0});
    ServiceConfig cfg;
    Service svc(cfg, testing::rule_client([](const backend::ChatRequest&) { return std::string("no json here"); }));
    const auto created = svc.create_session(w.body());
    const auto id = created.at("session_id").get<std::string>();
    const auto r = svc.generate_scene_graph(id);
    EXPECT_EQ(r.at("node_count"), 0);
    EXPECT_EQ(r.at("edge_count"), 0);
    EXPECT_EQ(r.at("warnings").size(), created.at("keyframe_count").get<std::size_t>());
    // One stricter retry per keyframe.
    EXPECT_EQ(200 - r.at("budget_remaining").get<int>(), 2 * created.at("keyframe_count").get<int>());
}

TEST(SceneGraph, RepeatIsIdempotent) {
    World w;
    auto svc = make_service();
    const auto id = svc.create_session(w.body()).at("session_id").get<std::string>();
    const auto a = svc.generate_scene_graph(id).at("graph");
    const auto b = svc.generate_scene_graph(id).at("graph");
    EXPECT_EQ(a, b);
    EXPECT_EQ(svc.get_graph(id), b);
}

// ---- graph queries ----------------------------------------------------------------------------

TEST(GraphQuery, ConflictBadRequestAndForceps) {
    World w;
    auto svc = make_service();
    const auto id = svc.create_session(w.body()).at("session_id").get<std::string>();
    EXPECT_EQ(code_of([&] { svc.graph_query(id, kLatestContact); }), ApiCode::conflict);
    EXPECT_EQ(http_status(ApiCode::conflict), 409);
    EXPECT_EQ(code_of([&] { svc.get_graph(id); }), ApiCode::conflict);
    svc.generate_scene_graph(id);
    try {
        svc.graph_query(id, "MATCH (a)-[r->(b) RETURN a");
        FAIL();
    } catch (const ApiError& e) {
        EXPECT_EQ(e.code(), ApiCode::bad_request);
        EXPECT_EQ(e.detail().at("offset"), 13);
    }
    const auto r = svc.graph_query(id, kLatestContact);
    ASSERT_EQ(r.at("rows").size(), 1u);
    EXPECT_EQ(r.at("rows").at(0).at("a"), "forceps@f1");
    // Same answer as running the query on the stored graph directly.
    const auto g = scenegen::graph_from_json(svc.get_graph(id));
    EXPECT_EQ(graphqa::latest_contact(g, "instrument", "tissue_region"), "forceps@f1");
}

// ---- state ------------------------------------------------------------------------------------

TEST(State, ReadsDoNotMutate) {
    World w;
    auto svc = make_service();
    const auto id = svc.create_session(w.body()).at("session_id").get<std::string>();
    svc.generate_scene_graph(id);
    const auto ref = svc.ask(id, "which?").at("trace_ref").get<std::string>();
    const auto before = svc.state_digest();
    svc.get_graph(id);
    svc.get_session(id);
    svc.get_trace(ref);
    svc.health();
    svc.graph_query(id, kLatestContact);
    EXPECT_EQ(code_of([&] { svc.get_graph("missing"); }), ApiCode::not_found);
    EXPECT_EQ(svc.state_digest(), before);
    svc.ask(id, "again?");
    EXPECT_NE(svc.state_digest(), before);
}

TEST(State, PersistAndLoadRestoreAnswers) {
    World w;
    testing::TempDir store;
    std::string id, digest;
    json answer;
    {
        auto svc = make_service(true, store.path());
        id = svc.create_session(w.body()).at("session_id").get<std::string>();
        svc.generate_scene_graph(id);
        svc.ask(id, "which?");
        answer = svc.graph_query(id, kLatestContact);
        digest = svc.state_digest();
    }
    auto restored = make_service(true, store.path());
    EXPECT_EQ(restored.session_ids(), std::vector<std::string>{id});
    EXPECT_EQ(restored.graph_query(id, kLatestContact), answer);
    EXPECT_EQ(restored.state_digest(), digest);

    // An explicit persist into a fresh directory loads back identically too.
    testing::TempDir copy;
    restored.persist(copy.path());
    auto again = make_service();
    again.load(copy.path());
    EXPECT_EQ(again.state_digest(), digest);
}

TEST(State, EmptyDirAndCorruptedGraph) {
    testing::TempDir empty;
    auto svc = make_service();
    svc.load(empty.path());
    EXPECT_TRUE(svc.session_ids().empty());
    svc.load(empty / "does-not-exist");
    EXPECT_TRUE(svc.session_ids().empty());

    World w;
    testing::TempDir store;
    std::string id;
    {
        auto writer = make_service(true, store.path());
        id = writer.create_session(w.body()).at("session_id").get<std::string>();
        writer.generate_scene_graph(id);
    }
    const auto graph_file = store.path() / "sessions" / id / "graph.json";
    ASSERT_TRUE(fs::exists(graph_file));
    testing::write_text(graph_file, "{\"version\": 1, \"nodes\": [");
    try {
        svc.load(store.path());
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find(graph_file.string()), std::string::npos) << e.what();
    }
}

TEST(State, CanonicalFiles) {
    testing::TempDir dir;
    write_canonical(dir / "a" / "x.json", json{{"b", 1}, {"a", {1, 2}}});
    EXPECT_EQ(testing::read_text(dir / "a" / "x.json"), "{\"a\":[1,2],\"b\":1}\n");
    EXPECT_EQ(read_json_file(dir / "a" / "x.json").at("b"), 1);
    EXPECT_THROW(read_json_file(dir / "missing.json"), Error);
}

}  // namespace
}  // namespace sceneagent::service
