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

#include <sys/wait.h>

#include <cstdlib>

#include "sceneagent/backend/client.hpp"
#include "sceneagent/scenegen/graph.hpp"
#include "sceneagent/service/service.hpp"
#include "support.hpp"

namespace sceneagent {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct CliRun {
    int code = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return q + "'";
}

class Cli : public ::testing::Test {
protected:
    CliRun run(const std::vector<std::string>& args) {
        std::string cmd = quote(SCENEAGENT_CLI);
        for (const auto& a : args) cmd += " " + quote(a);
        const auto out = dir_ / "stdout.txt";
        const auto err = dir_ / "stderr.txt";
        cmd += " >" + quote(out.string()) + " 2>" + quote(err.string()) + " </dev/null";
        // No backend endpoint can leak in from the environment.
        cmd = "env -u SCENEAGENT_BACKEND_URL " + cmd;
        const int status = std::system(cmd.c_str());
        CliRun r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        r.out = testing::read_text(out);
        r.err = testing::read_text(err);
        return r;
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    testing::TempDir dir_;
    fs::path manifest_ = testing::write_video(dir_ / "video", {0, 200});
};

TEST_F(Cli, UsageErrors) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"graphqa"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, IngestAndSample) {
    auto r = run({"ingest", manifest_.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("frame_count"), 2);
    EXPECT_EQ(run({"ingest", path("missing.json")}).code, 2);
    r = run({"sample", manifest_.string(), "--max-gap", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("keyframes").size(), 2u);
}

TEST_F(Cli, AskWithoutBackendAbstains) {
    // Every call misses; the agent records the failures and abstains.
    auto r = run({"ask", manifest_.string(), "Which instrument?"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(json::parse(r.out).at("abstained").get<bool>());
}

TEST_F(Cli, ScenegenWithoutBackendIsBackendError) {
    const auto r = run({"scenegen", manifest_.string()});
    EXPECT_EQ(r.code, 3) << r.out << r.err;
    EXPECT_NE(r.err.find("FixtureMiss"), std::string::npos) << r.err;
}

TEST_F(Cli, ExhaustedBudgetIsBackendError) {
    auto r = run({"ask", manifest_.string(), "Which instrument?", "--budget", "1"});
    EXPECT_EQ(r.code, 3) << r.out << r.err;
    EXPECT_NE(r.err.find("budget_exceeded"), std::string::npos) << r.err;
    r = run({"ask", manifest_.string(), "Which instrument?", "--budget", "-1"});
    EXPECT_EQ(r.code, 1);
}

TEST_F(Cli, FixtureReplayForScenegenAndAsk) {
    // Record what a vision model would answer through the in-process service,
    // then replay it through the CLI.
    auto recorder = std::make_shared<backend::RecordingTransport>([](const backend::ChatRequest& req) {
        return backend::ChatResponse{testing::clinic_reply(req, true), backend::FinishReason::stop, std::nullopt};
    });
    {
        backend::BackendProfile profile;
        service::Service svc(service::ServiceConfig{}, backend::ModelClient(profile, recorder));
        const auto id = svc.create_session({{"manifest_path", manifest_.string()}}).at("session_id").get<std::string>();
        svc.generate_scene_graph(id);
        svc.ask(id, "Which instrument touched the tissue last?");
    }
    recorder->fixtures().save(path("fixtures.json"));

    auto r = run({"--fixtures", path("fixtures.json"), "scenegen", manifest_.string(), "--out", path("graph.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("node_count"), 3);
    const auto graph = scenegen::import_graph(testing::read_text(path("graph.json")));
    EXPECT_TRUE(graph.nodes.count("forceps@f1"));

    r = run({"--fixtures", path("fixtures.json"), "ask", manifest_.string(), "Which instrument touched the tissue last?",
             "--scenegen", "--trace-out", path("trace.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("answer"), "forceps");
    EXPECT_EQ(json::parse(testing::read_text(path("trace.json"))).at("kind"), "agent");

    r = run({"graphqa", path("graph.json"), "MATCH (a:instrument)-[r:contacts]->(b:tissue_region) RETURN a LATEST"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(json::parse(r.out).at("rows").at(0).at("a"), "forceps@f1");
    r = run({"graphqa", path("graph.json"), "MATCH (a)-[r->(b) RETURN a"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("13"), std::string::npos) << r.err;
}

TEST_F(Cli, RetrievalRoundTrip) {
    json manifest = json::object();
    for (const auto& d : testing::fixture_corpus()) {
        testing::write_text(dir_ / (d.doc_id + ".txt"), d.text);
        manifest[d.doc_id] = d.doc_id + ".txt";
    }
    testing::write_text(dir_ / "corpus.json", manifest.dump());
    auto r = run({"retrieve-ingest", path("corpus.json"), "--out", path("index.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    r = run({"retrieve", path("index.json"), "Where does the scalpel go?"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("guidelines#0000"), std::string::npos) << r.out;
    EXPECT_EQ(run({"retrieve-ingest", path("corpus.json"), "--out", path("i2.json"), "--chunk-size", "12"}).code, 2);
}

TEST_F(Cli, ReportReconcilesTable) {
    const json counts = json::parse(R"([
        {"task_type":"action_reasoning","correct":11,"total":15},{"task_type":"action_recognition","correct":33,"total":55},
        {"task_type":"attribute_perception","correct":42,"total":54},{"task_type":"counting_problem","correct":21,"total":51},
        {"task_type":"information_synopsis","correct":40,"total":42},{"task_type":"ocr_problems","correct":22,"total":23},
        {"task_type":"object_reasoning","correct":30,"total":38},{"task_type":"object_recognition","correct":51,"total":78},
        {"task_type":"spatial_perception","correct":8,"total":11},{"task_type":"spatial_reasoning","correct":11,"total":16},
        {"task_type":"temporal_perception","correct":9,"total":13},{"task_type":"temporal_reasoning","correct":2,"total":4}])");
    json published{{"rows", json::array()}, {"overall", {{"correct", 282}, {"total", 400}, {"pct", "70.5"}}}};
    for (const auto& c : counts) {
        published["rows"].push_back({{"task_type", c["task_type"]}, {"correct", c["correct"]}, {"total", c["total"]},
                                     {"pct", c["task_type"] == "counting_problem" ? "41.1" : ""}});
    }
    // Fill the printed percentages that agree with the rows.
    const std::map<std::string, std::string> printed{
        {"action_reasoning", "73.3"},   {"action_recognition", "60.0"},  {"attribute_perception", "77.8"},
        {"information_synopsis", "95.2"}, {"ocr_problems", "95.7"},      {"object_reasoning", "78.9"},
        {"object_recognition", "65.4"},  {"spatial_perception", "72.7"}, {"spatial_reasoning", "68.8"},
        {"temporal_perception", "69.2"}, {"temporal_reasoning", "50.0"}};
    for (auto& row : published["rows"]) {
        if (auto it = printed.find(row["task_type"]); it != printed.end()) row["pct"] = it->second;
    }
    testing::write_text(dir_ / "counts.json", counts.dump());
    testing::write_text(dir_ / "table1.json", published.dump());
    testing::write_text(dir_ / "cmp.json", R"({"other": 64.0, "ours": 70.5})");
    const auto r = run({"report", path("counts.json"), "--comparison", path("cmp.json"), "--reconcile", path("table1.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("attribute_perception 42/54 77.8"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("280/400"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("reconcile 3 discrepancies"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("overall correct: printed 282, computed 280"), std::string::npos) << r.out;
    EXPECT_LT(r.out.find("ours"), r.out.find("other"));
}

TEST_F(Cli, EvalWithPredictions) {
    testing::write_text(dir_ / "qa.jsonl",
                        R"({"item_id":"q1","video_id":"v","question":"Which?","kind":"mcq","options":[["A","x"],["B","y"]],"gold":"B","task_type":"t","domain":null})"
                        "\n"
                        R"({"item_id":"q2","video_id":"v","question":"Which?","kind":"mcq","options":[["A","x"],["B","y"]],"gold":"A","task_type":"t","domain":null})"
                        "\n");
    testing::write_text(dir_ / "preds.jsonl", "{\"item_id\":\"q1\",\"answer\":\"(B)\"}\n{\"item_id\":\"q2\",\"answer\":\"B\"}\n");
    auto r = run({"eval", path("qa.jsonl"), "--predictions", path("preds.jsonl"), "--out", path("report.json")});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("t 1/2 50.0"), std::string::npos) << r.out;
    EXPECT_TRUE(fs::exists(dir_ / "report.json"));

    testing::write_text(dir_ / "partial.jsonl", "{\"item_id\":\"q1\",\"answer\":\"B\"}\n");
    EXPECT_EQ(run({"eval", path("qa.jsonl"), "--predictions", path("partial.jsonl")}).code, 2);
    EXPECT_EQ(run({"eval", path("qa.jsonl")}).code, 1);
}

}  // namespace
}  // namespace sceneagent
