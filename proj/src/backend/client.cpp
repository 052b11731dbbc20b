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

#include "sceneagent/backend/client.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "sceneagent/error.hpp"

namespace sceneagent::backend {

using nlohmann::json;

// ---- profile ---------------------------------------------------------------

void BackendProfile::validate() const {
    if (kind == BackendKind::http && !base_url) {
        throw Error(ErrorCode::invalid_argument, "http backend profile '" + name + "' requires base_url");
    }
    if (kind == BackendKind::scripted && !fixture_path) {
        throw Error(ErrorCode::invalid_argument, "scripted backend profile '" + name + "' requires a fixture path");
    }
    if (timeout_ms <= 0) throw Error(ErrorCode::invalid_argument, "timeout_ms must be positive");
    if (max_retries < 0 || max_retries > 10) throw Error(ErrorCode::invalid_argument, "max_retries must be in [0,10]");
    if (temperature < 0.0 || temperature > 2.0) throw Error(ErrorCode::invalid_argument, "temperature outside [0,2]");
    if (embed_dim == 0) throw Error(ErrorCode::invalid_argument, "embed_dim must be positive");
}

BackendProfile BackendProfile::from_json(const json& doc) {
    BackendProfile p;
    try {
        p.name = doc.value("name", p.name);
        const auto kind = doc.value("kind", std::string("scripted"));
        if (kind == "http") {
            p.kind = BackendKind::http;
        } else if (kind == "scripted") {
            p.kind = BackendKind::scripted;
        } else {
            throw Error(ErrorCode::invalid_argument, "unknown backend kind: " + kind);
        }
        if (doc.contains("base_url") && !doc["base_url"].is_null()) p.base_url = doc["base_url"].get<std::string>();
        p.path = doc.value("path", p.path);
        p.model_id = doc.value("model_id", p.model_id);
        p.timeout_ms = doc.value("timeout_ms", p.timeout_ms);
        p.max_retries = doc.value("max_retries", p.max_retries);
        p.backoff_base_ms = doc.value("backoff_base_ms", p.backoff_base_ms);
        p.temperature = doc.value("temperature", p.temperature);
        if (doc.contains("seed") && !doc["seed"].is_null()) p.seed = doc["seed"].get<std::int64_t>();
        if (doc.contains("fixtures") && !doc["fixtures"].is_null()) {
            p.fixture_path = doc["fixtures"].get<std::string>();
        }
        if (doc.contains("bearer_token") && !doc["bearer_token"].is_null()) {
            p.bearer_token = doc["bearer_token"].get<std::string>();
        }
        p.embed_dim = doc.value("embed_dim", p.embed_dim);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("backend profile: ") + e.what());
    }
    return p;
}

BackendProfile BackendProfile::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "backend profile not found: " + path.string());
    try {
        auto p = from_json(json::parse(in));
        if (p.fixture_path && p.fixture_path->is_relative()) p.fixture_path = path.parent_path() / *p.fixture_path;
        return p;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
    }
}

BackendProfile BackendProfile::scripted(std::filesystem::path fixtures, std::string model_id) {
    BackendProfile p;
    p.name = "scripted";
    p.kind = BackendKind::scripted;
    p.fixture_path = std::move(fixtures);
    p.model_id = std::move(model_id);
    return p;
}

json BackendProfile::to_json() const {
    return json{{"name", name},
                {"kind", kind == BackendKind::http ? "http" : "scripted"},
                {"base_url", base_url ? json(*base_url) : json(nullptr)},
                {"path", path},
                {"model_id", model_id},
                {"timeout_ms", timeout_ms},
                {"max_retries", max_retries},
                {"backoff_base_ms", backoff_base_ms},
                {"temperature", temperature},
                {"seed", seed ? json(*seed) : json(nullptr)},
                {"fixtures", fixture_path ? json(fixture_path->string()) : json(nullptr)},
                {"embed_dim", embed_dim}};
}

void BackendProfile::apply_environment() {
    if (const char* v = std::getenv("SCENEAGENT_BACKEND_URL"); v && *v) base_url = v;
    if (const char* v = std::getenv("SCENEAGENT_TIMEOUT_MS"); v && *v) timeout_ms = std::atoi(v);
    if (const char* v = std::getenv("SCENEAGENT_MAX_RETRIES"); v && *v) max_retries = std::atoi(v);
    if (const char* v = std::getenv("SCENEAGENT_API_TOKEN"); v && *v) bearer_token = v;
}

// ---- fixtures --------------------------------------------------------------

FixtureTable FixtureTable::from_json(const json& doc) {
    if (!doc.is_object()) throw Error(ErrorCode::invalid_argument, "fixture file must be a JSON object");
    FixtureTable table;
    for (const auto& [digest, entry] : doc.items()) {
        FixtureEntry e;
        e.text = entry.at("text").get<std::string>();
        e.finish_reason = finish_reason_from_string(entry.value("finish_reason", std::string("stop")));
        table.entries_.emplace(digest, std::move(e));
    }
    return table;
}

FixtureTable FixtureTable::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "fixture file not found: " + path.string());
    try {
        return from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
    }
}

json FixtureTable::to_json() const {
    json doc = json::object();
    for (const auto& [digest, e] : entries_) {
        doc[digest] = {{"text", e.text}, {"finish_reason", to_string(e.finish_reason)}};
    }
    return doc;
}

void FixtureTable::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << to_json().dump(2) << '\n';
}

std::string FixtureTable::add(const ChatRequest& req, std::string text, FinishReason reason) {
    auto digest = cache_digest(req);
    entries_[digest] = FixtureEntry{std::move(text), reason};
    return digest;
}

void FixtureTable::add_digest(std::string digest, FixtureEntry entry) { entries_[std::move(digest)] = std::move(entry); }

const FixtureEntry* FixtureTable::find(const std::string& digest) const {
    auto it = entries_.find(digest);
    return it == entries_.end() ? nullptr : &it->second;
}

ChatResponse scripted_lookup(const FixtureTable& fixtures, const ChatRequest& req) {
    const auto canonical = canonical_request(req);
    const auto digest = sha256_hex(canonical);
    const auto* entry = fixtures.find(digest);
    if (!entry) {
        throw Error(ErrorCode::fixture_miss, "no fixture for request digest " + digest + "; canonical request: " + canonical,
                    json{{"digest", digest}, {"canonical_request", canonical}});
    }
    return ChatResponse{entry->text, entry->finish_reason, std::nullopt};
}

// ---- transports --------------------------------------------------------------

ChatResponse Transport::send(const ChatRequest& req) {
    ++invocations_;
    return do_send(req);
}

FixtureTable RecordingTransport::fixtures() const {
    std::lock_guard lock(mu_);
    return fixtures_;
}

ChatResponse RecordingTransport::do_send(const ChatRequest& req) {
    auto response = responder_(req);
    std::lock_guard lock(mu_);
    fixtures_.add(req, response.text, response.finish_reason);
    return response;
}

HttpTransport::HttpTransport(BackendProfile profile) : profile_(std::move(profile)) { profile_.validate(); }

ChatResponse parse_response_body(const std::string& body) {
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_response, std::string("response is not JSON: ") + e.what());
    }
    try {
        ChatResponse r;
        if (doc.contains("choices")) {
            const auto& choice = doc.at("choices").at(0);
            r.text = choice.at("message").at("content").get<std::string>();
            r.finish_reason = finish_reason_from_string(choice.value("finish_reason", std::string("stop")));
        } else {
            r.text = doc.at("text").get<std::string>();
            r.finish_reason = finish_reason_from_string(doc.value("finish_reason", std::string("stop")));
        }
        if (doc.contains("usage") && doc["usage"].is_object()) {
            r.usage = Usage{doc["usage"].value("prompt_tokens", 0), doc["usage"].value("completion_tokens", 0)};
        }
        if (r.text.empty() && r.finish_reason != FinishReason::error) {
            throw Error(ErrorCode::malformed_response, "empty text with finish_reason != error");
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_response, std::string("response schema: ") + e.what());
    }
}

ChatResponse HttpTransport::do_send(const ChatRequest& req) {
    httplib::Client client(*profile_.base_url);
    const auto timeout = std::chrono::milliseconds(profile_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (profile_.bearer_token) headers.emplace("Authorization", "Bearer " + *profile_.bearer_token);

    const auto res = client.Post(profile_.path, headers, request_body(req).dump(), "application/json");
    if (!res) {
        const auto err = res.error();
        if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
            throw Error(ErrorCode::timeout, "backend timed out: " + httplib::to_string(err), json{{"retryable", true}});
        }
        throw Error(ErrorCode::backend_unavailable, "backend unreachable: " + httplib::to_string(err),
                    json{{"retryable", true}});
    }
    if (res->status >= 500 || res->status == 429) {
        throw Error(ErrorCode::backend_unavailable, "backend returned HTTP " + std::to_string(res->status),
                    json{{"retryable", true}, {"status", res->status}});
    }
    if (res->status < 200 || res->status >= 300) {
        throw Error(ErrorCode::backend_unavailable, "backend returned HTTP " + std::to_string(res->status),
                    json{{"retryable", false}, {"status", res->status}});
    }
    return parse_response_body(res->body);
}

std::shared_ptr<Transport> make_transport(const BackendProfile& profile) {
    profile.validate();
    if (profile.kind == BackendKind::http) return std::make_shared<HttpTransport>(profile);
    return std::make_shared<ScriptedTransport>(FixtureTable::load(*profile.fixture_path));
}

// ---- cache / budget / log --------------------------------------------------

ResponseCache::Result ResponseCache::get_or_compute(const std::string& digest,
                                                    const std::function<ChatResponse()>& compute) {
    std::promise<ChatResponse> promise;
    std::shared_future<ChatResponse> existing;
    {
        std::lock_guard lock(mu_);
        if (auto it = entries_.find(digest); it != entries_.end()) {
            existing = it->second;
        } else {
            entries_.emplace(digest, promise.get_future().share());
        }
    }
    if (existing.valid()) return Result{existing.get(), true};
    try {
        auto value = compute();
        promise.set_value(value);
        return Result{std::move(value), false};
    } catch (...) {
        promise.set_exception(std::current_exception());
        std::lock_guard lock(mu_);
        entries_.erase(digest);
        throw;
    }
}

std::size_t ResponseCache::size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
}

void ResponseCache::clear() {
    std::lock_guard lock(mu_);
    entries_.clear();
}

bool CallBudget::try_consume() {
    auto current = remaining_.load();
    while (current > 0) {
        if (remaining_.compare_exchange_weak(current, current - 1)) return true;
    }
    return false;
}

std::size_t CallLog::append(CallRecord record) {
    std::lock_guard lock(mu_);
    record.seq = records_.size();
    records_.push_back(std::move(record));
    return records_.back().seq;
}

std::vector<CallRecord> CallLog::snapshot() const {
    std::lock_guard lock(mu_);
    return records_;
}

std::vector<CallRecord> CallLog::since(std::size_t seq) const {
    std::lock_guard lock(mu_);
    if (seq >= records_.size()) return {};
    return {records_.begin() + static_cast<std::ptrdiff_t>(seq), records_.end()};
}

std::size_t CallLog::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

// ---- client ------------------------------------------------------------------

ModelClient::ModelClient(BackendProfile profile, std::shared_ptr<Transport> transport,
                         std::shared_ptr<ResponseCache> cache)
    : profile_(std::move(profile)), transport_(std::move(transport)), cache_(std::move(cache)) {}

ModelClient ModelClient::with_session(std::shared_ptr<CallBudget> budget, std::shared_ptr<CallLog> log) const {
    ModelClient copy = *this;
    copy.budget_ = std::move(budget);
    copy.log_ = std::move(log);
    return copy;
}

ChatResponse ModelClient::call_with_retries(const ChatRequest& req) const {
    for (int attempt = 0;; ++attempt) {
        try {
            return transport_->send(req);
        } catch (const Error& e) {
            const bool retryable = e.detail().is_object() && e.detail().value("retryable", false);
            if (!retryable || attempt >= profile_.max_retries) throw;
            const auto delay = std::chrono::milliseconds(static_cast<long long>(profile_.backoff_base_ms) << attempt);
            std::this_thread::sleep_for(delay);
        }
    }
}

ChatResponse ModelClient::complete(ChatRequest req) const {
    if (req.model_id.empty()) req.model_id = profile_.model_id;
    if (!req.seed) req.seed = profile_.seed;
    req.validate();

    if (budget_ && !budget_->try_consume()) {
        throw Error(ErrorCode::budget_exceeded, "session call budget exhausted");
    }
    const auto digest = cache_digest(req);
    CallRecord record{0, digest, req.sample_index, false, true};
    try {
        ChatResponse response;
        if (cache_) {
            auto result = cache_->get_or_compute(digest, [&] { return call_with_retries(req); });
            record.cache_hit = result.hit;
            response = std::move(result.response);
        } else {
            response = call_with_retries(req);
        }
        if (log_) log_->append(record);
        return response;
    } catch (...) {
        record.ok = false;
        if (log_) log_->append(record);
        throw;
    }
}

ModelClient make_client(const BackendProfile& profile) {
    return ModelClient(profile, make_transport(profile), std::make_shared<ResponseCache>());
}

}  // namespace sceneagent::backend
