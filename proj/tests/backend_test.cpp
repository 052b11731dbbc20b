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

#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "httplib.h"
#include "sceneagent/backend/chat.hpp"
#include "sceneagent/backend/client.hpp"
#include "sceneagent/backend/embedder.hpp"
#include "sceneagent/error.hpp"
#include "sceneagent/media/frame.hpp"
#include "support.hpp"

namespace sceneagent::backend {
namespace {

using nlohmann::json;

ChatRequest text_request(const std::string& body, int sample_index = 0) {
    ChatRequest r;
    r.model_id = "vlm";
    r.messages.push_back(ChatMessage::text(Role::user, body));
    r.sample_index = sample_index;
    return r;
}

BackendProfile plain_profile() {
    BackendProfile p;
    p.name = "test";
    p.model_id = "vlm";
    return p;
}

// ---- requests and digests --------------------------------------------------------

TEST(ChatRequest, ValidationRules) {
    ChatRequest r;
    r.model_id = "m";
    EXPECT_THROW(r.validate(), Error);  // no messages
    r.messages.push_back(ChatMessage{Role::user, {}});
    EXPECT_THROW(r.validate(), Error);  // message without parts
    r.messages[0] = ChatMessage{Role::user, {ImageRef{"/definitely/not/here.pgm", 0}}};
    EXPECT_THROW(r.validate(), Error);  // missing image
    EXPECT_NO_THROW(text_request("hi").validate());
}

TEST(ChatRequest, WireBodyShape) {
    testing::TempDir dir;
    media::write_pgm(dir / "k.pgm", media::solid_frame(2, 2, 9));
    ChatRequest r = text_request("describe");
    r.messages[0].parts.push_back(ImageRef{dir / "k.pgm", 3});
    r.seed = 17;
    const auto body = request_body(r);
    EXPECT_EQ(body.at("model"), "vlm");
    EXPECT_EQ(body.at("messages")[0].at("role"), "user");
    const auto& content = body.at("messages")[0].at("content");
    EXPECT_EQ(content[0], (json{{"type", "text"}, {"text", "describe"}}));
    EXPECT_EQ(content[1].at("type"), "image_ref");
    EXPECT_EQ(content[1].at("frame_index"), 3);
    EXPECT_EQ(content[1].at("sha256"), file_sha256_hex(dir / "k.pgm"));
    EXPECT_EQ(body.at("seed"), 17);
    EXPECT_EQ(body.at("sample_index"), 0);
}

TEST(Digest, Sha256KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Digest, CanonicalFormIsSortedCompactJson) {
    const auto r = text_request("a \"quoted\" body");
    const auto canonical = canonical_request(r);
    // Re-serializing through a parse must be a fixed point: sorted keys, no spaces.
    EXPECT_EQ(json::parse(canonical).dump(), canonical);
    EXPECT_EQ(canonical.find(": "), std::string::npos);
    EXPECT_LT(canonical.find("\"max_tokens\""), canonical.find("\"messages\""));
    EXPECT_EQ(cache_digest(r), sha256_hex(canonical));
}

TEST(Digest, KeyOrderOfEquivalentDocumentsIrrelevant) {
    // Two JSON texts with permuted keys parse to the same canonical string.
    const auto a = json::parse(R"({"b":1,"a":{"y":2,"x":[1,{"q":0,"p":1}]}})");
    const auto b = json::parse(R"({"a":{"x":[1,{"p":1,"q":0}],"y":2},"b":1})");
    EXPECT_EQ(a.dump(), b.dump());
}

TEST(Digest, SampleIndexAndTemperatureParticipate) {
    auto a = text_request("q", 0);
    auto b = text_request("q", 1);
    EXPECT_NE(cache_digest(a), cache_digest(b));
    auto c = text_request("q", 0);
    c.temperature = 0.7;
    EXPECT_NE(cache_digest(a), cache_digest(c));
    EXPECT_EQ(cache_digest(a), cache_digest(text_request("q", 0)));
}

TEST(Digest, ImagesKeyedByNameAndContent) {
    testing::TempDir d1, d2;
    media::write_pgm(d1 / "k.pgm", media::solid_frame(2, 2, 9));
    media::write_pgm(d2 / "k.pgm", media::solid_frame(2, 2, 9));
    auto a = text_request("x");
    a.messages[0].parts.push_back(ImageRef{d1 / "k.pgm", 0});
    auto b = text_request("x");
    b.messages[0].parts.push_back(ImageRef{d2 / "k.pgm", 0});
    EXPECT_EQ(cache_digest(a), cache_digest(b));
    media::write_pgm(d2 / "k.pgm", media::solid_frame(2, 2, 10));
    EXPECT_NE(cache_digest(a), cache_digest(b));
}

// ---- scripted backend ------------------------------------------------------------

TEST(Scripted, LookupHitAndSampleIndex) {
    FixtureTable t;
    t.add(text_request("what is on the tray?", 0), "a scalpel on a tray");
    t.add(text_request("what is on the tray?", 1), "forceps");
    EXPECT_EQ(scripted_lookup(t, text_request("what is on the tray?", 0)).text, "a scalpel on a tray");
    EXPECT_EQ(scripted_lookup(t, text_request("what is on the tray?", 1)).text, "forceps");
}

TEST(Scripted, MissNamesDigestAndEchoesRequest) {
    FixtureTable t;
    const auto r = text_request("unknown");
    try {
        scripted_lookup(t, r);
        FAIL() << "expected fixture_miss";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::fixture_miss);
        EXPECT_EQ(e.detail().at("digest"), cache_digest(r));
        EXPECT_EQ(e.detail().at("canonical_request"), canonical_request(r));
        EXPECT_NE(std::string(e.what()).find(cache_digest(r)), std::string::npos);
    }
}

TEST(Scripted, FixtureFileRoundTrip) {
    testing::TempDir dir;
    FixtureTable t;
    const auto d = t.add(text_request("q"), "answer", FinishReason::length);
    t.save(dir / "fx.json");
    const auto loaded = FixtureTable::load(dir / "fx.json");
    ASSERT_NE(loaded.find(d), nullptr);
    EXPECT_EQ(loaded.find(d)->text, "answer");
    EXPECT_EQ(loaded.find(d)->finish_reason, FinishReason::length);
    auto profile = BackendProfile::scripted(dir / "fx.json", "vlm");
    EXPECT_EQ(make_client(profile).complete(text_request("q")).text, "answer");
}

TEST(Client, FillsModelFromProfile) {
    FixtureTable t;
    t.add(text_request("q"), "ok");
    const ModelClient client(plain_profile(), std::make_shared<ScriptedTransport>(t));
    auto r = text_request("q");
    r.model_id.clear();
    EXPECT_EQ(client.complete(r).text, "ok");
}

TEST(Client, IdenticalRequestServedFromCache) {
    FixtureTable t;
    t.add(text_request("q"), "a scalpel on a tray");
    auto transport = std::make_shared<ScriptedTransport>(t);
    auto log = std::make_shared<CallLog>();
    const auto client = ModelClient(plain_profile(), transport).with_session(nullptr, log);
    EXPECT_EQ(client.complete(text_request("q")).text, "a scalpel on a tray");
    EXPECT_EQ(client.complete(text_request("q")).text, "a scalpel on a tray");
    EXPECT_EQ(transport->invocations(), 1u);
    const auto records = log->snapshot();
    ASSERT_EQ(records.size(), 2u);
    EXPECT_FALSE(records[0].cache_hit);
    EXPECT_TRUE(records[1].cache_hit);
}

TEST(Client, CacheSoundnessOnRandomSequences) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        auto transport = std::make_shared<RecordingTransport>(
            [](const ChatRequest& r) { return ChatResponse{"echo " + testing::prompt_of(r), FinishReason::stop, {}}; });
        const ModelClient client(plain_profile(), transport);
        std::set<std::string> digests;
        for (int i = 0; i < 40; ++i) {
            const auto r = text_request("q" + std::to_string(rng() % 8), int(rng() % 3));
            digests.insert(cache_digest(r));
            EXPECT_EQ(client.complete(r).text, "echo " + testing::prompt_of(r));
        }
        EXPECT_EQ(transport->invocations(), digests.size());
        EXPECT_EQ(client.cache()->size(), digests.size());
    }
}

TEST(Client, ConcurrentIdenticalRequestsShareOneCall) {
    std::atomic<int> calls{0};
    auto transport = std::make_shared<RecordingTransport>([&](const ChatRequest&) {
        ++calls;
        std::this_thread::sleep_for(std::chrono::milliseconds(30));
        return ChatResponse{"slow", FinishReason::stop, {}};
    });
    const ModelClient client(plain_profile(), transport);
    std::vector<std::thread> threads;
    for (int i = 0; i < 6; ++i) threads.emplace_back([&] { EXPECT_EQ(client.complete(text_request("same")).text, "slow"); });
    for (auto& t : threads) t.join();
    EXPECT_EQ(calls.load(), 1);
}

TEST(Client, FailuresAreNotCached) {
    FixtureTable empty;
    auto transport = std::make_shared<ScriptedTransport>(empty);
    const ModelClient client(plain_profile(), transport);
    EXPECT_THROW(client.complete(text_request("q")), Error);
    EXPECT_THROW(client.complete(text_request("q")), Error);
    EXPECT_EQ(transport->invocations(), 2u);
    EXPECT_EQ(client.cache()->size(), 0u);
}

TEST(Client, BudgetChargesEveryCallAndStopsAtZero) {
    FixtureTable t;
    t.add(text_request("q"), "ok");
    auto transport = std::make_shared<ScriptedTransport>(t);
    auto budget = std::make_shared<CallBudget>(2);
    const auto client = ModelClient(plain_profile(), transport).with_session(budget, std::make_shared<CallLog>());
    client.complete(text_request("q"));
    client.complete(text_request("q"));
    try {
        client.complete(text_request("q"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::budget_exceeded);
    }
    EXPECT_EQ(budget->remaining(), 0);
    EXPECT_EQ(client.call_log()->size(), 2u);
    EXPECT_EQ(transport->invocations(), 1u);
}

// ---- http transport ----------------------------------------------------------------

struct StubServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};

    template <typename Handler>
    explicit StubServer(Handler handler) {
        server.Post("/v1/chat/completions", [this, handler](const httplib::Request& req, httplib::Response& res) {
            const int n = ++hits;
            handler(n, req, res);
        });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubServer() {
        server.stop();
        thread.join();
    }
    BackendProfile profile() const {
        BackendProfile p = plain_profile();
        p.kind = BackendKind::http;
        p.base_url = "http://127.0.0.1:" + std::to_string(port);
        p.max_retries = 2;
        p.backoff_base_ms = 5;
        p.timeout_ms = 2000;
        return p;
    }
};

TEST(Http, RetriesTwoServerErrorsThenSucceeds) {
    StubServer stub([](int n, const httplib::Request& req, httplib::Response& res) {
        if (n <= 2) {
            res.status = 500;
            return;
        }
        const auto body = json::parse(req.body);
        res.set_content(json{{"choices", {{{"message", {{"content", "seen " + body.at("model").get<std::string>()}}},
                                           {"finish_reason", "stop"}}}},
                             {"usage", {{"prompt_tokens", 3}, {"completion_tokens", 2}}}}
                            .dump(),
                        "application/json");
    });
    const auto client = make_client(stub.profile());
    const auto r = client.complete(text_request("hello"));
    EXPECT_EQ(r.text, "seen vlm");
    ASSERT_TRUE(r.usage);
    EXPECT_EQ(r.usage->completion_tokens, 2);
    EXPECT_EQ(stub.hits.load(), 3);
    EXPECT_EQ(client.transport()->invocations(), 3u);
}

TEST(Http, GivesUpAfterMaxRetries) {
    StubServer stub([](int, const httplib::Request&, httplib::Response& res) { res.status = 503; });
    const auto client = make_client(stub.profile());
    try {
        client.complete(text_request("hello"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::backend_unavailable);
    }
    EXPECT_EQ(stub.hits.load(), 3);
}

TEST(Http, ClientErrorsAreNotRetried) {
    StubServer stub([](int, const httplib::Request&, httplib::Response& res) { res.status = 400; });
    EXPECT_THROW(make_client(stub.profile()).complete(text_request("x")), Error);
    EXPECT_EQ(stub.hits.load(), 1);
}

TEST(Http, MalformedBodyIsMalformedResponse) {
    StubServer stub([](int, const httplib::Request&, httplib::Response& res) { res.set_content("{not json", "application/json"); });
    try {
        make_client(stub.profile()).complete(text_request("x"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::malformed_response);
    }
    EXPECT_EQ(stub.hits.load(), 1);
}

TEST(Http, BearerTokenSent) {
    std::string seen;
    StubServer stub([&](int, const httplib::Request& req, httplib::Response& res) {
        seen = req.get_header_value("Authorization");
        res.set_content(R"({"text":"ok","finish_reason":"stop"})", "application/json");
    });
    auto p = stub.profile();
    p.bearer_token = "s3cret";
    EXPECT_EQ(make_client(p).complete(text_request("x")).text, "ok");
    EXPECT_EQ(seen, "Bearer s3cret");
}

TEST(Http, UnreachableIsBackendUnavailable) {
    int port;
    {
        httplib::Server probe;
        port = probe.bind_to_any_port("127.0.0.1");
    }
    BackendProfile p = plain_profile();
    p.kind = BackendKind::http;
    p.base_url = "http://127.0.0.1:" + std::to_string(port);
    p.max_retries = 0;
    p.timeout_ms = 500;
    try {
        make_client(p).complete(text_request("x"));
        FAIL();
    } catch (const Error& e) {
        EXPECT_TRUE(e.code() == ErrorCode::backend_unavailable || e.code() == ErrorCode::timeout);
    }
}

TEST(ResponseBody, BothShapes) {
    EXPECT_EQ(parse_response_body(R"({"text":"a","finish_reason":"length"})").finish_reason, FinishReason::length);
    EXPECT_EQ(parse_response_body(R"({"text":"","finish_reason":"error"})").text, "");
    EXPECT_THROW(parse_response_body(R"({"text":"","finish_reason":"stop"})"), Error);
    EXPECT_THROW(parse_response_body(R"({"choices":[]})"), Error);
}

TEST(Profile, ValidationAndJson) {
    BackendProfile p;
    p.kind = BackendKind::http;
    EXPECT_THROW(p.validate(), Error);
    p.base_url = "http://localhost:1";
    EXPECT_NO_THROW(p.validate());
    BackendProfile s;
    EXPECT_THROW(s.validate(), Error);  // scripted without fixtures
    const auto round = BackendProfile::from_json(p.to_json());
    EXPECT_EQ(round.base_url, p.base_url);
    EXPECT_EQ(round.kind, BackendKind::http);
    EXPECT_THROW(BackendProfile::from_json(json{{"kind", "carrier-pigeon"}}), Error);
}

TEST(Profile, EnvironmentOverrides) {
    BackendProfile p;
    setenv("SCENEAGENT_BACKEND_URL", "http://10.0.0.1:9", 1);
    setenv("SCENEAGENT_MAX_RETRIES", "4", 1);
    p.apply_environment();
    unsetenv("SCENEAGENT_BACKEND_URL");
    unsetenv("SCENEAGENT_MAX_RETRIES");
    EXPECT_EQ(p.base_url, "http://10.0.0.1:9");
    EXPECT_EQ(p.max_retries, 4);
}

// ---- embedder -------------------------------------------------------------------

std::uint64_t fnv_oracle(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

TEST(Embedder, FnvMatchesIndependentComputation) {
    for (const std::string s : {"", "a", "scalpel", "tray", "suture", "kit"}) EXPECT_EQ(fnv1a64(s), fnv_oracle(s));
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cull);
}

TEST(Embedder, EmptyIsZero) {
    const auto v = HashingEmbedder(256).embed("");
    ASSERT_EQ(v.size(), 256u);
    for (float x : v) EXPECT_EQ(x, 0.0f);
    EXPECT_EQ(cosine(v, v), 0.0);
}

TEST(Embedder, SelfCosineIsOne) {
    const HashingEmbedder e(256);
    for (const std::string s : {"scalpel", "Return the scalpel to the tray.", "a a a b"}) {
        EXPECT_NEAR(cosine(e.embed(s), e.embed(s)), 1.0, 1e-6);
    }
}

TEST(Embedder, DisjointBucketsGiveZeroCosine) {
    std::set<std::uint64_t> buckets;
    for (const std::string t : {"scalpel", "tray", "suture", "kit"}) buckets.insert(fnv_oracle(t) % 256);
    ASSERT_EQ(buckets.size(), 4u) << "bucket collision among the four tokens";
    const HashingEmbedder e(256);
    EXPECT_EQ(cosine(e.embed("scalpel tray"), e.embed("suture kit")), 0.0);
}

TEST(Embedder, TermFrequencyAndCaseFolding) {
    const HashingEmbedder e(64);
    const auto v = e.embed("Tray tray, clamp");
    const auto bt = fnv_oracle("tray") % 64, bc = fnv_oracle("clamp") % 64;
    ASSERT_NE(bt, bc);
    EXPECT_NEAR(v[bt], 2.0 / std::sqrt(5.0), 1e-6);
    EXPECT_NEAR(v[bc], 1.0 / std::sqrt(5.0), 1e-6);
    EXPECT_EQ(e.bucket("tray"), bt);
}

TEST(Embedder, NormIsZeroOrOne) {
    std::mt19937_64 rng(3);
    const HashingEmbedder e(256);
    const std::string alphabet = "abc xyz,.-";
    for (int trial = 0; trial < 200; ++trial) {
        std::string s;
        for (std::size_t i = rng() % 30; i > 0; --i) s += alphabet[rng() % alphabet.size()];
        const auto v = e.embed(s);
        double n = 0;
        for (float x : v) n += double(x) * x;
        EXPECT_TRUE(std::abs(n) < 1e-12 || std::abs(std::sqrt(n) - 1.0) < 1e-5) << s;
        EXPECT_EQ(v, e.embed(s));
    }
}

}  // namespace
}  // namespace sceneagent::backend
