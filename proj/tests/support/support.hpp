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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sceneagent/agent/agent.hpp"
#include "sceneagent/backend/client.hpp"
#include "sceneagent/graphqa/execute.hpp"
#include "sceneagent/graphqa/query.hpp"
#include "sceneagent/media/frame.hpp"
#include "sceneagent/media/manifest.hpp"
#include "sceneagent/retrieval/index.hpp"
#include "sceneagent/scenegen/graph.hpp"

namespace sceneagent::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& body);
std::string read_text(const std::filesystem::path& path);

/// Writes one uniform P5 frame per level plus a manifest, returns its path.
std::filesystem::path write_video(const std::filesystem::path& dir, const std::vector<std::uint8_t>& levels,
                                  double fps = 1.0, std::size_t width = 8, std::size_t height = 6,
                                  const std::string& video_id = "vid");

/// Same, from arbitrary frames.
std::filesystem::path write_video(const std::filesystem::path& dir, const std::vector<media::LuminanceFrame>& frames,
                                  double fps, const std::string& video_id = "vid");

media::LuminanceFrame random_frame(std::mt19937_64& rng, std::size_t width, std::size_t height);

/// Random well-formed graph: up to max_nodes nodes over clinical categories,
/// up to max_edges edges, intervals inside the node span.
scenegen::SceneGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes, std::size_t max_edges);

/// Random query that passes check_query, drawing labels mostly from the graph.
graphqa::QueryAst random_query(std::mt19937_64& rng, const scenegen::SceneGraph& graph);

/// Literal reading of the query semantics, written independently of execute().
struct OracleResult {
    std::vector<graphqa::Binding> rows;
    std::optional<nlohmann::json> value;
    std::vector<std::string> chosen_ids;
};
OracleResult brute_force(const graphqa::QueryAst& ast, const scenegen::SceneGraph& graph);

/// contacts(scalpel -> tissue_region, t_end 46) as e1 and
/// contacts(forceps -> tissue_region, t_end 80) as e2.
scenegen::SceneGraph two_edge_contacts_graph();

/// Three reference documents; "guidelines" mentions scalpel and tray together,
/// "tray_care" mentions only the tray.
std::vector<retrieval::Document> fixture_corpus();

/// Operating-room transcript with five utterances, two mentioning a clamp.
media::Transcript fixture_transcript();

/// Answers through `responder` once to author fixtures, then returns a client
/// that replays those fixtures through the scripted transport.
backend::ModelClient record_then_replay(const std::function<std::string(const backend::ChatRequest&)>& responder,
                                        const std::function<void(const backend::ModelClient&)>& drive);

/// Client whose scripted transport holds exactly `fixtures`.
backend::ModelClient scripted_client(backend::FixtureTable fixtures);

/// Client that answers every request through `rule`, recording as it goes.
backend::ModelClient rule_client(std::function<std::string(const backend::ChatRequest&)> rule);

/// Keyframe index named by an extraction prompt ("... keyframe N ...").
std::optional<std::size_t> prompted_keyframe(const backend::ChatRequest& req);

/// Replies for sessions over 8x6 fixture frames. Extraction prompts get a
/// scalpel touching a tissue region on keyframe 0; later keyframes show the
/// forceps touching it instead when `forceps_later`, else the scalpel again.
/// Any other prompt gets "Final Answer: forceps".
std::string clinic_reply(const backend::ChatRequest& req, bool forceps_later);

/// Text of the first text part of the first message.
std::string prompt_of(const backend::ChatRequest& req);

/// The three agent scenarios used by the acceptance checks.
enum class Scenario { immediate, tool_then_answer, fallback_abstain };

struct ScenarioWorld {
    media::Transcript transcript;
    retrieval::RetrievalIndex index;
    scenegen::SceneGraph graph;
    agent::AgentContext context() const;
};
ScenarioWorld scenario_world();

std::string scenario_question(Scenario s);
std::string scenario_reply(Scenario s, const backend::ChatRequest& req);

struct ScenarioRun {
    agent::AgentTrace trace;
    std::string trace_json;
    std::vector<backend::CallRecord> log;
};

/// Authors the scenario's fixtures, then runs the agent against them
/// `runs` times with fresh caches.
std::vector<ScenarioRun> run_scenario(Scenario s, std::size_t runs);

}  // namespace sceneagent::testing
