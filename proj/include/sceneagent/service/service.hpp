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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sceneagent/agent/agent.hpp"
#include "sceneagent/backend/client.hpp"
#include "sceneagent/error.hpp"
#include "sceneagent/media/manifest.hpp"
#include "sceneagent/media/memory_buffer.hpp"
#include "sceneagent/media/sampler.hpp"
#include "sceneagent/media/transcript.hpp"
#include "sceneagent/retrieval/index.hpp"
#include "sceneagent/scenegen/graph.hpp"
#include "sceneagent/scenegen/vocabulary.hpp"

namespace sceneagent::service {

enum class ApiCode { not_found, bad_request, budget_exceeded, backend_unavailable, conflict };

std::string_view to_string(ApiCode code);
int http_status(ApiCode code);

class ApiError : public std::runtime_error {
public:
    ApiError(ApiCode code, const std::string& message, nlohmann::json detail = nullptr)
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ApiCode code() const noexcept { return code_; }
    const nlohmann::json& detail() const noexcept { return detail_; }
    nlohmann::json to_json() const;

private:
    ApiCode code_;
    nlohmann::json detail_;
};

/// Maps a library error onto the closed API code set.
ApiError to_api_error(const Error& e);

struct SessionState {
    std::string session_id;
    media::MediaManifest manifest;
    std::vector<media::Keyframe> keyframes;
    std::optional<media::Transcript> transcript;
    media::MemoryBuffer buffer;
    std::vector<media::Observation> observations;
    std::optional<scenegen::SceneGraph> graph;
    std::vector<std::string> warnings;
    std::optional<std::filesystem::path> index_path;
    std::shared_ptr<const retrieval::RetrievalIndex> index;
    std::int64_t initial_budget = 0;
    std::shared_ptr<backend::CallBudget> budget;
    std::shared_ptr<backend::CallLog> log;
    std::vector<std::string> trace_refs;
    std::int64_t created_at = 0;  // unix seconds; not part of state identity

    mutable std::mutex mu;  // single writer per session
};

struct ServiceConfig {
    std::optional<std::filesystem::path> store_dir;  // write-through persistence when set
    std::int64_t default_budget = 200;
    std::size_t buffer_window = 8;
    std::optional<media::SamplerConfig> sampler;  // defaults_for(fps) when unset
    agent::AgentConfig agent;
    std::shared_ptr<const retrieval::RetrievalIndex> default_index;
    std::shared_ptr<const scenegen::Vocabulary> vocabulary;  // clinical when unset
};

/// The three workflows over sessions. Handlers return JSON documents and
/// throw ApiError; each session's mutations are serialized.
class Service {
public:
    Service(ServiceConfig cfg, backend::ModelClient client);

    /// Body: {"manifest_path": str} or {"manifest": {...}, "base_dir": str?},
    /// optional "budget" and "index_path".
    nlohmann::json create_session(const nlohmann::json& body);
    nlohmann::json ask(const std::string& session_id, const std::string& question);
    nlohmann::json generate_scene_graph(const std::string& session_id);
    nlohmann::json graph_query(const std::string& session_id, const std::string& query);
    nlohmann::json get_graph(const std::string& session_id) const;
    nlohmann::json get_session(const std::string& session_id) const;
    nlohmann::json get_trace(const std::string& trace_ref) const;
    nlohmann::json health() const;

    /// SHA-256 over the canonical serialization of every session, trace and
    /// graph (creation times excluded).
    std::string state_digest() const;

    std::vector<std::string> session_ids() const;

    /// Writes every session under store_dir/sessions/<id>/.
    void persist(const std::filesystem::path& store_dir) const;
    /// Replaces the registry with what store_dir holds. A missing or empty
    /// directory gives an empty registry; unreadable files fail naming the path.
    void load(const std::filesystem::path& store_dir);

    const ServiceConfig& config() const { return cfg_; }

private:
    std::shared_ptr<SessionState> find(const std::string& session_id) const;
    backend::ModelClient session_client(const SessionState& s) const;
    agent::AgentContext context_for(const SessionState& s) const;
    const scenegen::Vocabulary& vocabulary() const;
    std::string next_session_id();
    void write_session(const SessionState& s) const;
    void write_trace(const std::string& session_id, const std::string& ref, const nlohmann::json& trace) const;
    nlohmann::json session_doc(const SessionState& s) const;

    ServiceConfig cfg_;
    backend::ModelClient client_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<SessionState>> sessions_;
    std::map<std::string, nlohmann::json> traces_;  // trace_ref -> document
    std::uint64_t id_counter_ = 0;
};

/// Writes `doc` as canonical JSON (sorted keys, no insignificant whitespace,
/// trailing newline) via a temporary file and rename.
void write_canonical(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace sceneagent::service
