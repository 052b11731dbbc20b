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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sceneagent/backend/chat.hpp"

namespace sceneagent::backend {

enum class BackendKind { http, scripted };

struct BackendProfile {
    std::string name = "default";
    BackendKind kind = BackendKind::scripted;
    std::optional<std::string> base_url;  // http only, e.g. "http://127.0.0.1:8080"
    std::string path = "/v1/chat/completions";
    std::string model_id = "scripted";
    int timeout_ms = 30000;
    int max_retries = 2;
    int backoff_base_ms = 250;
    double temperature = 0.0;
    std::optional<std::int64_t> seed;
    std::optional<std::filesystem::path> fixture_path;  // scripted only
    std::optional<std::string> bearer_token;
    std::size_t embed_dim = 256;

    void validate() const;

    static BackendProfile from_json(const nlohmann::json& doc);
    static BackendProfile load(const std::filesystem::path& path);
    static BackendProfile scripted(std::filesystem::path fixtures, std::string model_id = "scripted");
    nlohmann::json to_json() const;

    /// SCENEAGENT_BACKEND_URL, SCENEAGENT_TIMEOUT_MS, SCENEAGENT_MAX_RETRIES and
    /// SCENEAGENT_API_TOKEN override the corresponding fields when set.
    void apply_environment();
};

struct FixtureEntry {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
};

/// digest_hex -> response. File form: {digest: {"text":..., "finish_reason":...}}.
class FixtureTable {
public:
    static FixtureTable from_json(const nlohmann::json& doc);
    static FixtureTable load(const std::filesystem::path& path);
    nlohmann::json to_json() const;
    void save(const std::filesystem::path& path) const;

    /// Registers the response for req, returning its digest.
    std::string add(const ChatRequest& req, std::string text, FinishReason reason = FinishReason::stop);
    void add_digest(std::string digest, FixtureEntry entry);

    const FixtureEntry* find(const std::string& digest) const;
    std::size_t size() const { return entries_.size(); }

private:
    std::map<std::string, FixtureEntry> entries_;
};

/// Exact-match lookup by cache digest. Throws Error{fixture_miss} whose detail
/// carries the digest and the canonical request.
ChatResponse scripted_lookup(const FixtureTable& fixtures, const ChatRequest& req);

/// One attempt against a model backend. Retryable failures are reported as
/// Error{timeout} or Error{backend_unavailable} with detail {"retryable": true}.
class Transport {
public:
    virtual ~Transport() = default;
    ChatResponse send(const ChatRequest& req);
    std::size_t invocations() const { return invocations_.load(); }

protected:
    virtual ChatResponse do_send(const ChatRequest& req) = 0;

private:
    std::atomic<std::size_t> invocations_{0};
};

class ScriptedTransport final : public Transport {
public:
    explicit ScriptedTransport(FixtureTable fixtures) : fixtures_(std::move(fixtures)) {}
    const FixtureTable& fixtures() const { return fixtures_; }

protected:
    ChatResponse do_send(const ChatRequest& req) override { return scripted_lookup(fixtures_, req); }

private:
    FixtureTable fixtures_;
};

/// Answers through a caller-supplied responder and records every exchange as
/// a fixture, so scripted tables can be authored from rules.
class RecordingTransport final : public Transport {
public:
    using Responder = std::function<ChatResponse(const ChatRequest&)>;
    explicit RecordingTransport(Responder responder) : responder_(std::move(responder)) {}
    FixtureTable fixtures() const;

protected:
    ChatResponse do_send(const ChatRequest& req) override;

private:
    Responder responder_;
    mutable std::mutex mu_;
    FixtureTable fixtures_;
};

class HttpTransport final : public Transport {
public:
    explicit HttpTransport(BackendProfile profile);

protected:
    ChatResponse do_send(const ChatRequest& req) override;

private:
    BackendProfile profile_;
};

/// Parses either {"text","finish_reason","usage"} or a chat-completions style
/// {"choices":[{"message":{"content"},"finish_reason"}]} body.
ChatResponse parse_response_body(const std::string& body);

std::shared_ptr<Transport> make_transport(const BackendProfile& profile);

/// Response cache keyed by digest with in-flight de-duplication: concurrent
/// identical requests wait on one backend call. Failures are not cached.
class ResponseCache {
public:
    struct Result {
        ChatResponse response;
        bool hit = false;
    };

    Result get_or_compute(const std::string& digest, const std::function<ChatResponse()>& compute);
    std::size_t size() const;
    void clear();

private:
    mutable std::mutex mu_;
    std::map<std::string, std::shared_future<ChatResponse>> entries_;
};

/// Remaining backend calls for a session.
class CallBudget {
public:
    explicit CallBudget(std::int64_t initial) : remaining_(initial) {}
    bool try_consume();
    std::int64_t remaining() const { return remaining_.load(); }
    void set(std::int64_t v) { remaining_.store(v); }

private:
    std::atomic<std::int64_t> remaining_;
};

struct CallRecord {
    std::size_t seq = 0;
    std::string digest;
    int sample_index = 0;
    bool cache_hit = false;
    bool ok = true;
};

class CallLog {
public:
    std::size_t append(CallRecord record);
    std::vector<CallRecord> snapshot() const;
    std::vector<CallRecord> since(std::size_t seq) const;
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::vector<CallRecord> records_;
};

/// Client for one model role. Cheap to copy; copies share transport and cache
/// and can be given their own budget and call log (one per session).
class ModelClient {
public:
    ModelClient(BackendProfile profile, std::shared_ptr<Transport> transport,
                std::shared_ptr<ResponseCache> cache = std::make_shared<ResponseCache>());

    /// Fills model/temperature/seed from the profile when the request leaves
    /// them unset, charges the budget, consults the cache and otherwise calls
    /// the transport with exponential backoff on retryable failures.
    ChatResponse complete(ChatRequest req) const;

    ModelClient with_session(std::shared_ptr<CallBudget> budget, std::shared_ptr<CallLog> log) const;

    const BackendProfile& profile() const { return profile_; }
    const std::shared_ptr<Transport>& transport() const { return transport_; }
    const std::shared_ptr<ResponseCache>& cache() const { return cache_; }
    const std::shared_ptr<CallLog>& call_log() const { return log_; }
    const std::shared_ptr<CallBudget>& budget() const { return budget_; }

private:
    ChatResponse call_with_retries(const ChatRequest& req) const;

    BackendProfile profile_;
    std::shared_ptr<Transport> transport_;
    std::shared_ptr<ResponseCache> cache_;
    std::shared_ptr<CallBudget> budget_;
    std::shared_ptr<CallLog> log_;
};

ModelClient make_client(const BackendProfile& profile);

}  // namespace sceneagent::backend
