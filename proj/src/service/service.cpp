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

#include "sceneagent/service/service.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <random>

#include "sceneagent/backend/chat.hpp"
#include "sceneagent/graphqa/execute.hpp"
#include "sceneagent/graphqa/query.hpp"
#include "sceneagent/service/extraction.hpp"

namespace sceneagent::service {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(ApiCode code) {
    switch (code) {
        case ApiCode::not_found: return "not_found";
        case ApiCode::bad_request: return "bad_request";
        case ApiCode::budget_exceeded: return "budget_exceeded";
        case ApiCode::backend_unavailable: return "backend_unavailable";
        case ApiCode::conflict: return "conflict";
    }
    return "bad_request";
}

int http_status(ApiCode code) {
    switch (code) {
        case ApiCode::not_found: return 404;
        case ApiCode::bad_request: return 400;
        case ApiCode::budget_exceeded: return 429;
        case ApiCode::backend_unavailable: return 503;
        case ApiCode::conflict: return 409;
    }
    return 400;
}

json ApiError::to_json() const {
    return json{{"error", {{"code", to_string(code_)}, {"message", what()}, {"detail", detail_}}}};
}

ApiError to_api_error(const Error& e) {
    json detail = e.detail().is_object() ? e.detail() : json::object();
    detail["error_code"] = to_string(e.code());
    switch (e.code()) {
        case ErrorCode::not_found: return ApiError(ApiCode::not_found, e.what(), detail);
        case ErrorCode::conflict: return ApiError(ApiCode::conflict, e.what(), detail);
        case ErrorCode::budget_exceeded: return ApiError(ApiCode::budget_exceeded, e.what(), detail);
        case ErrorCode::timeout:
        case ErrorCode::malformed_response:
        case ErrorCode::fixture_miss:
        case ErrorCode::backend_unavailable: return ApiError(ApiCode::backend_unavailable, e.what(), detail);
        default: return ApiError(ApiCode::bad_request, e.what(), detail);
    }
}

void write_canonical(const fs::path& path, const json& doc) {
    fs::create_directories(path.parent_path());
    const auto tmp = fs::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string(), {{"path", path.string()}});
        out << doc.dump() << '\n';
        if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string(), {{"path", path.string()}});
    }
    fs::rename(tmp, path);
}

json read_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read " + path.string(), {{"path", path.string()}});
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::io_error, "corrupted file " + path.string() + ": " + e.what(), {{"path", path.string()}});
    }
}

namespace {

json calls_to_json(const std::vector<backend::CallRecord>& calls) {
    json out = json::array();
    for (const auto& c : calls) out.push_back({{"digest", c.digest}, {"sample_index", c.sample_index}, {"ok", c.ok}});
    return out;
}

json keyframes_to_json(const std::vector<media::Keyframe>& kfs) {
    json out = json::array();
    for (const auto& kf : kfs) out.push_back(keyframe_to_json(kf));
    return out;
}

}  // namespace

Service::Service(ServiceConfig cfg, backend::ModelClient client) : cfg_(std::move(cfg)), client_(std::move(client)) {
    if (cfg_.default_budget < 0) throw Error(ErrorCode::invalid_argument, "default budget must be >= 0");
    cfg_.agent.validate();
    if (cfg_.store_dir) load(*cfg_.store_dir);
}

const scenegen::Vocabulary& Service::vocabulary() const {
    return cfg_.vocabulary ? *cfg_.vocabulary : scenegen::Vocabulary::clinical();
}

std::shared_ptr<SessionState> Service::find(const std::string& session_id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw ApiError(ApiCode::not_found, "unknown session " + session_id);
    return it->second;
}

backend::ModelClient Service::session_client(const SessionState& s) const { return client_.with_session(s.budget, s.log); }

agent::AgentContext Service::context_for(const SessionState& s) const {
    agent::AgentContext ctx;
    ctx.manifest = &s.manifest;
    ctx.keyframes = &s.keyframes;
    ctx.buffer = &s.buffer;
    ctx.transcript = s.transcript ? &*s.transcript : nullptr;
    ctx.graph = s.graph ? &*s.graph : nullptr;
    ctx.index = s.index.get();
    ctx.vocabulary = &vocabulary();
    return ctx;
}

std::string Service::next_session_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    for (;;) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "s%016llx", static_cast<unsigned long long>(rng() ^ ++id_counter_));
        if (!sessions_.contains(buf)) return buf;
    }
}

json Service::create_session(const json& body) {
    if (!body.is_object()) throw ApiError(ApiCode::bad_request, "body must be a JSON object");
    auto s = std::make_shared<SessionState>();
    try {
        if (body.contains("manifest_path") && body["manifest_path"].is_string()) {
            s->manifest = media::load_manifest(body["manifest_path"].get<std::string>());
        } else if (body.contains("manifest") && body["manifest"].is_object()) {
            const fs::path base = body.contains("base_dir") && body["base_dir"].is_string()
                                      ? fs::path(body["base_dir"].get<std::string>())
                                      : fs::current_path();
            s->manifest = media::parse_manifest(body["manifest"], base);
        } else {
            throw ApiError(ApiCode::bad_request, "body needs \"manifest_path\" or \"manifest\"");
        }
        for (auto& p : s->manifest.frame_paths) p = fs::absolute(p).lexically_normal();
        if (s->manifest.transcript_path) {
            s->manifest.transcript_path = fs::absolute(*s->manifest.transcript_path).lexically_normal();
            s->transcript = media::load_transcript(*s->manifest.transcript_path);
        }
        const auto sampler = cfg_.sampler.value_or(media::SamplerConfig::defaults_for(s->manifest.fps));
        s->keyframes = media::select_keyframes(s->manifest, sampler);

        s->initial_budget = cfg_.default_budget;
        if (body.contains("budget")) {
            if (!body["budget"].is_number_integer() || body["budget"].get<std::int64_t>() < 0) {
                throw ApiError(ApiCode::bad_request, "budget must be a non-negative integer");
            }
            s->initial_budget = body["budget"].get<std::int64_t>();
        }
        if (body.contains("index_path") && body["index_path"].is_string()) {
            s->index_path = fs::absolute(body["index_path"].get<std::string>());
            s->index = std::make_shared<retrieval::RetrievalIndex>(retrieval::load_index(*s->index_path));
        } else {
            s->index = cfg_.default_index;
        }
    } catch (const Error& e) {
        throw ApiError(ApiCode::bad_request, e.what(), {{"error_code", to_string(e.code())}});
    }
    s->budget = std::make_shared<backend::CallBudget>(s->initial_budget);
    s->log = std::make_shared<backend::CallLog>();
    s->buffer = media::MemoryBuffer(cfg_.buffer_window);
    s->created_at = static_cast<std::int64_t>(std::time(nullptr));
    {
        std::unique_lock lock(mu_);
        s->session_id = next_session_id();
        sessions_.emplace(s->session_id, s);
    }
    if (cfg_.store_dir) write_session(*s);
    return json{{"session_id", s->session_id},
                {"video_id", s->manifest.video_id},
                {"frame_count", s->manifest.frame_count()},
                {"keyframe_count", s->keyframes.size()},
                {"keyframes", keyframes_to_json(s->keyframes)},
                {"budget", s->initial_budget}};
}

json Service::ask(const std::string& session_id, const std::string& question) {
    auto s = find(session_id);
    std::lock_guard guard(s->mu);
    if (question.empty()) throw ApiError(ApiCode::bad_request, "question must be non-empty");
    if (s->budget->remaining() <= 0) {
        throw ApiError(ApiCode::budget_exceeded, "session call budget exhausted", {{"budget_remaining", 0}});
    }
    const auto ref = session_id + "." + std::to_string(10001 + s->trace_refs.size()).substr(1);
    const auto registry = agent::default_registry();
    agent::AgentTrace trace;
    try {
        trace = agent::run_agent(question, context_for(*s), registry, cfg_.agent, session_client(*s));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::budget_exceeded && e.detail().contains("trace")) {
            json doc = e.detail()["trace"];
            doc["kind"] = "agent";
            doc["session_id"] = session_id;
            doc["trace_ref"] = ref;
            doc["incomplete"] = true;
            s->trace_refs.push_back(ref);
            {
                std::unique_lock lock(mu_);
                traces_[ref] = doc;
            }
            if (cfg_.store_dir) {
                write_trace(session_id, ref, doc);
                write_session(*s);
            }
            throw ApiError(ApiCode::budget_exceeded, e.what(), {{"trace_ref", ref}, {"budget_remaining", 0}});
        }
        throw to_api_error(e);
    }
    json doc = agent::trace_to_json(trace);
    doc["kind"] = "agent";
    doc["session_id"] = session_id;
    doc["trace_ref"] = ref;
    s->trace_refs.push_back(ref);
    {
        std::unique_lock lock(mu_);
        traces_[ref] = doc;
    }
    if (cfg_.store_dir) {
        write_trace(session_id, ref, doc);
        write_session(*s);
    }
    return json{{"answer", trace.answer},
                {"confidence", trace.confidence},
                {"abstained", trace.abstained},
                {"fallback_used", trace.fallback_used},
                {"trace_ref", ref},
                {"calls", trace.call_count()},
                {"budget_remaining", s->budget->remaining()}};
}

json Service::generate_scene_graph(const std::string& session_id) {
    auto s = find(session_id);
    std::lock_guard guard(s->mu);
    const auto ref = session_id + "." + std::to_string(10001 + s->trace_refs.size()).substr(1);
    SceneGenResult result;
    try {
        result = service::generate_scene_graph(s->manifest, s->keyframes, vocabulary(), session_client(*s));
    } catch (const Error& e) {
        throw to_api_error(e);
    }
    s->graph = result.graph;
    s->observations = result.observations;
    s->warnings = result.warnings;
    s->buffer.clear();
    for (const auto& obs : s->observations) s->buffer.push(obs);

    json keyframes = json::array();
    for (const auto& k : result.keyframes) {
        keyframes.push_back({{"frame_index", k.frame_index}, {"ok", k.observation.has_value()}, {"calls", calls_to_json(k.calls)}});
    }
    json doc{{"kind", "scenegen"},
             {"session_id", session_id},
             {"trace_ref", ref},
             {"keyframes", keyframes},
             {"warnings", result.warnings}};
    s->trace_refs.push_back(ref);
    {
        std::unique_lock lock(mu_);
        traces_[ref] = doc;
    }
    if (cfg_.store_dir) {
        write_trace(session_id, ref, doc);
        write_session(*s);
    }
    return json{{"graph", scenegen::graph_to_json(*s->graph)},
                {"warnings", s->warnings},
                {"trace_ref", ref},
                {"node_count", s->graph->nodes.size()},
                {"edge_count", s->graph->edges.size()},
                {"budget_remaining", s->budget->remaining()}};
}

json Service::graph_query(const std::string& session_id, const std::string& query) {
    auto s = find(session_id);
    std::lock_guard guard(s->mu);
    if (!s->graph) throw ApiError(ApiCode::conflict, "no scene graph yet; run scenegraph generation first");
    try {
        const auto ast = graphqa::parse_query(query);
        graphqa::check_query(ast);
        auto out = graphqa::result_to_json(graphqa::execute(ast, *s->graph));
        out["query"] = graphqa::render_query(ast);
        return out;
    } catch (const Error& e) {
        json detail = e.detail().is_object() ? e.detail() : json::object();
        detail["error_code"] = to_string(e.code());
        throw ApiError(ApiCode::bad_request, e.what(), detail);
    }
}

json Service::get_graph(const std::string& session_id) const {
    auto s = find(session_id);
    std::lock_guard guard(s->mu);
    if (!s->graph) throw ApiError(ApiCode::conflict, "no scene graph yet; run scenegraph generation first");
    return scenegen::graph_to_json(*s->graph);
}

json Service::get_session(const std::string& session_id) const {
    auto s = find(session_id);
    std::lock_guard guard(s->mu);
    auto doc = session_doc(*s);
    doc["created_at"] = s->created_at;
    return doc;
}

json Service::get_trace(const std::string& trace_ref) const {
    std::shared_lock lock(mu_);
    auto it = traces_.find(trace_ref);
    if (it == traces_.end()) throw ApiError(ApiCode::not_found, "unknown trace " + trace_ref);
    return it->second;
}

json Service::health() const {
    std::shared_lock lock(mu_);
    return json{{"status", "ok"}, {"sessions", sessions_.size()}, {"traces", traces_.size()}};
}

std::vector<std::string> Service::session_ids() const {
    std::shared_lock lock(mu_);
    std::vector<std::string> ids;
    for (const auto& [id, s] : sessions_) ids.push_back(id);
    return ids;
}

json Service::session_doc(const SessionState& s) const {
    json observations = json::array();
    for (const auto& o : s.observations) observations.push_back(observation_to_json(o));
    return json{{"version", 1},
                {"session_id", s.session_id},
                {"manifest", media::manifest_to_json(s.manifest)},
                {"keyframes", keyframes_to_json(s.keyframes)},
                {"transcript", s.transcript ? media::transcript_to_json(*s.transcript) : json(nullptr)},
                {"observations", observations},
                {"buffer_window", s.buffer.window()},
                {"warnings", s.warnings},
                {"has_graph", s.graph.has_value()},
                {"index_path", s.index_path ? json(s.index_path->string()) : json(nullptr)},
                {"initial_budget", s.initial_budget},
                {"budget_remaining", s.budget->remaining()},
                {"trace_refs", s.trace_refs}};
}

std::string Service::state_digest() const {
    std::vector<std::shared_ptr<SessionState>> sessions;
    json traces;
    {
        std::shared_lock lock(mu_);
        for (const auto& [id, s] : sessions_) sessions.push_back(s);
        traces = json(traces_);
    }
    json state = json::object();
    for (const auto& s : sessions) {
        std::lock_guard guard(s->mu);
        state[s->session_id] = {{"session", session_doc(*s)},
                                {"graph", s->graph ? scenegen::graph_to_json(*s->graph) : json(nullptr)}};
    }
    return backend::sha256_hex(json{{"sessions", state}, {"traces", traces}}.dump());
}

void Service::write_session(const SessionState& s) const {
    const auto dir = *cfg_.store_dir / "sessions" / s.session_id;
    auto doc = session_doc(s);
    doc["created_at"] = s.created_at;
    write_canonical(dir / "session.json", doc);
    if (s.graph) {
        write_canonical(dir / "graph.json", scenegen::graph_to_json(*s.graph));
    } else {
        fs::remove(dir / "graph.json");
    }
}

void Service::write_trace(const std::string& session_id, const std::string& ref, const json& trace) const {
    write_canonical(*cfg_.store_dir / "sessions" / session_id / "traces" / (ref + ".json"), trace);
}

void Service::persist(const fs::path& store_dir) const {
    std::vector<std::shared_ptr<SessionState>> sessions;
    std::map<std::string, json> traces;
    {
        std::shared_lock lock(mu_);
        for (const auto& [id, s] : sessions_) sessions.push_back(s);
        traces = traces_;
    }
    for (const auto& s : sessions) {
        std::lock_guard guard(s->mu);
        const auto dir = store_dir / "sessions" / s->session_id;
        auto doc = session_doc(*s);
        doc["created_at"] = s->created_at;
        write_canonical(dir / "session.json", doc);
        if (s->graph) write_canonical(dir / "graph.json", scenegen::graph_to_json(*s->graph));
        for (const auto& ref : s->trace_refs) {
            if (auto it = traces.find(ref); it != traces.end()) write_canonical(dir / "traces" / (ref + ".json"), it->second);
        }
    }
}

void Service::load(const fs::path& store_dir) {
    std::map<std::string, std::shared_ptr<SessionState>> sessions;
    std::map<std::string, json> traces;
    const auto root = store_dir / "sessions";
    if (fs::exists(root)) {
        std::vector<fs::path> dirs;
        for (const auto& entry : fs::directory_iterator(root)) {
            if (entry.is_directory()) dirs.push_back(entry.path());
        }
        std::sort(dirs.begin(), dirs.end());
        for (const auto& dir : dirs) {
            const auto session_file = dir / "session.json";
            const auto doc = read_json_file(session_file);
            auto s = std::make_shared<SessionState>();
            try {
                s->session_id = doc.at("session_id").get<std::string>();
                s->manifest = media::parse_manifest(doc.at("manifest"), dir);
                for (const auto& k : doc.at("keyframes")) s->keyframes.push_back(keyframe_from_json(k));
                if (!doc.at("transcript").is_null()) s->transcript = media::parse_transcript(doc["transcript"]);
                s->buffer = media::MemoryBuffer(doc.at("buffer_window").get<std::size_t>());
                for (const auto& o : doc.at("observations")) {
                    s->observations.push_back(observation_from_json(o));
                    s->buffer.push(s->observations.back());
                }
                s->warnings = doc.at("warnings").get<std::vector<std::string>>();
                if (!doc.at("index_path").is_null()) {
                    s->index_path = doc["index_path"].get<std::string>();
                    s->index = std::make_shared<retrieval::RetrievalIndex>(retrieval::load_index(*s->index_path));
                } else {
                    s->index = cfg_.default_index;
                }
                s->initial_budget = doc.at("initial_budget").get<std::int64_t>();
                s->budget = std::make_shared<backend::CallBudget>(doc.at("budget_remaining").get<std::int64_t>());
                s->log = std::make_shared<backend::CallLog>();
                s->trace_refs = doc.at("trace_refs").get<std::vector<std::string>>();
                s->created_at = doc.value("created_at", std::int64_t{0});
            } catch (const json::exception& e) {
                throw Error(ErrorCode::io_error, "corrupted file " + session_file.string() + ": " + e.what(),
                            {{"path", session_file.string()}});
            } catch (const Error& e) {
                throw Error(ErrorCode::io_error, "cannot restore " + session_file.string() + ": " + e.what(),
                            {{"path", session_file.string()}});
            }
            if (doc.value("has_graph", false)) {
                const auto graph_file = dir / "graph.json";
                try {
                    s->graph = scenegen::graph_from_json(read_json_file(graph_file));
                } catch (const Error& e) {
                    throw Error(ErrorCode::io_error, "corrupted file " + graph_file.string() + ": " + e.what(),
                                {{"path", graph_file.string()}});
                } catch (const json::exception& e) {
                    throw Error(ErrorCode::io_error, "corrupted file " + graph_file.string() + ": " + e.what(),
                                {{"path", graph_file.string()}});
                }
            }
            for (const auto& ref : s->trace_refs) traces[ref] = read_json_file(dir / "traces" / (ref + ".json"));
            sessions.emplace(s->session_id, std::move(s));
        }
    }
    std::unique_lock lock(mu_);
    sessions_ = std::move(sessions);
    traces_ = std::move(traces);
}

}  // namespace sceneagent::service
