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

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sceneagent/backend/client.hpp"
#include "sceneagent/media/manifest.hpp"
#include "sceneagent/media/memory_buffer.hpp"
#include "sceneagent/media/sampler.hpp"
#include "sceneagent/media/transcript.hpp"
#include "sceneagent/retrieval/index.hpp"
#include "sceneagent/scenegen/graph.hpp"
#include "sceneagent/scenegen/vocabulary.hpp"

namespace sceneagent::agent {

/// Read-only handles the tools work against. Any of them may be absent; a tool
/// whose input is missing answers with an "ERROR: ..." observation.
struct AgentContext {
    const media::MediaManifest* manifest = nullptr;
    const std::vector<media::Keyframe>* keyframes = nullptr;
    const media::MemoryBuffer* buffer = nullptr;
    const media::Transcript* transcript = nullptr;
    const scenegen::SceneGraph* graph = nullptr;
    const retrieval::RetrievalIndex* index = nullptr;
    const scenegen::Vocabulary* vocabulary = nullptr;
    std::size_t context_chars = 2000;
};

struct ArgField {
    std::string name;
    std::string type;  // "string" | "integer"
    bool required = true;
};

struct ToolSpec {
    std::string name;
    std::string description;
    std::vector<ArgField> args;
    /// Returns the observation text; throwing Error turns into "ERROR: ...".
    std::function<std::string(const nlohmann::json& args, const AgentContext& ctx, const backend::ModelClient& client)>
        handler;
};

class ToolRegistry {
public:
    /// Throws Error{invalid_argument} on a duplicate name or one outside [a-z_]+.
    void add(ToolSpec spec);
    const ToolSpec* find(std::string_view name) const;
    const std::vector<ToolSpec>& tools() const { return tools_; }
    /// One line per tool: "name {"arg": type, ...}: description".
    std::string render() const;

private:
    std::vector<ToolSpec> tools_;
};

/// video_qa, transcript_search, graph_query, retrieve and final_answer.
ToolRegistry default_registry();

struct AgentConfig {
    std::size_t max_steps = 6;
    std::size_t k_samples = 3;
    double confidence_threshold = 0.5;
    /// Temperature for confidence samples after the first.
    double sample_temperature = 0.7;
    std::size_t retrieve_top_n = 3;
    std::size_t summary_edges = 5;

    void validate() const;
};

enum class ActionKind { tool, final_answer, error };

struct ParsedAction {
    std::string thought;
    ActionKind kind = ActionKind::tool;
    std::string tool;
    nlohmann::json args = nlohmann::json::object();
    std::string answer;
};

/// Grammar: an optional "Thought: <text>" line, then "Action: <tool>
/// <json object>" or "Final Answer: <text>". The first conforming block wins
/// and trailing text is ignored. Throws Error{unparsable_action}.
ParsedAction parse_action(std::string_view model_output);

/// Lowercase, trim, collapse whitespace, strip terminal punctuation and a
/// leading article.
std::string normalize_answer(std::string_view answer);

struct Consensus {
    std::string answer;       // first surface form of the modal answer
    double confidence = 0.0;  // modal count / k
    std::size_t modal_count = 0;
    std::vector<std::optional<std::string>> samples;  // by sample_index; nullopt = failed
};

/// Modal vote over samples; ties go to the group seen first. Failed samples
/// never match. With no valid sample the answer is "" and confidence 0.
Consensus consensus(const std::vector<std::optional<std::string>>& samples);

/// A backend call as recorded in a trace. Cache hits are not distinguished so
/// that repeated runs serialize identically.
struct CallRef {
    std::string digest;
    int sample_index = 0;
    bool ok = true;

    bool operator==(const CallRef&) const = default;
};

struct AgentStep {
    std::size_t step_index = 0;
    std::string phase = "main";  // "main" | "fallback"
    std::string thought;
    ActionKind kind = ActionKind::tool;
    std::string tool;
    nlohmann::json args = nlohmann::json::object();
    std::string answer;       // final_answer only
    std::string observation;  // empty for final_answer
    std::vector<std::string> samples;  // final_answer: raw sample answers ("" = failed)
    std::vector<CallRef> calls;

    bool operator==(const AgentStep&) const = default;
};

struct AgentTrace {
    std::string question;
    std::vector<AgentStep> steps;
    std::string answer;
    double confidence = 0.0;
    std::size_t k_samples = 0;
    bool fallback_used = false;
    bool abstained = false;

    std::size_t call_count() const;
    bool operator==(const AgentTrace&) const = default;
};

nlohmann::json trace_to_json(const AgentTrace& trace);
AgentTrace trace_from_json(const nlohmann::json& doc);

/// The ReAct loop. Every backend call made through `client` during the run is
/// attributed to exactly one step; when the client carries no call log the
/// run installs its own. Error{budget_exceeded} propagates; other backend
/// failures become "ERROR: ..." observations.
AgentTrace run_agent(const std::string& question, const AgentContext& ctx, const ToolRegistry& registry,
                     const AgentConfig& cfg, const backend::ModelClient& client);

}  // namespace sceneagent::agent
