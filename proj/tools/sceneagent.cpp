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

// Command-line driver: one subcommand per pipeline stage.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 backend error.

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "sceneagent/agent/agent.hpp"
#include "sceneagent/backend/client.hpp"
#include "sceneagent/error.hpp"
#include "sceneagent/eval/qa.hpp"
#include "sceneagent/eval/report.hpp"
#include "sceneagent/graphqa/execute.hpp"
#include "sceneagent/graphqa/query.hpp"
#include "sceneagent/media/manifest.hpp"
#include "sceneagent/media/sampler.hpp"
#include "sceneagent/retrieval/index.hpp"
#include "sceneagent/retrieval/search.hpp"
#include "sceneagent/scenegen/graph.hpp"
#include "sceneagent/scenegen/vocabulary.hpp"
#include "sceneagent/service/http.hpp"
#include "sceneagent/service/service.hpp"

namespace sa = sceneagent;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitBackend = 3;

struct Globals {
    std::string backend_profile;
    std::string fixtures;
    std::string store;
    std::string vocabulary;
};

bool is_backend_code(sa::ErrorCode c) {
    switch (c) {
        case sa::ErrorCode::timeout:
        case sa::ErrorCode::malformed_response:
        case sa::ErrorCode::fixture_miss:
        case sa::ErrorCode::budget_exceeded:
        case sa::ErrorCode::backend_unavailable: return true;
        default: return false;
    }
}

int exit_code_for(const sa::service::ApiError& e) {
    switch (e.code()) {
        case sa::service::ApiCode::budget_exceeded:
        case sa::service::ApiCode::backend_unavailable: return kExitBackend;
        default: return kExitData;
    }
}

sa::backend::ModelClient make_backend(const Globals& g) {
    sa::backend::BackendProfile profile;
    if (!g.backend_profile.empty()) {
        profile = sa::backend::BackendProfile::load(g.backend_profile);
    } else if (const char* url = std::getenv("SCENEAGENT_BACKEND_URL"); url && *url) {
        profile.kind = sa::backend::BackendKind::http;
    }
    if (!g.fixtures.empty()) {
        profile.kind = sa::backend::BackendKind::scripted;
        profile.fixture_path = g.fixtures;
    }
    profile.apply_environment();
    if (profile.kind == sa::backend::BackendKind::scripted && !profile.fixture_path) {
        // No backend configured: every call misses.
        return sa::backend::ModelClient(profile, std::make_shared<sa::backend::ScriptedTransport>(sa::backend::FixtureTable{}));
    }
    return sa::backend::make_client(profile);
}

std::shared_ptr<const sa::scenegen::Vocabulary> vocabulary_for(const Globals& g) {
    if (g.vocabulary.empty()) return nullptr;
    return std::make_shared<sa::scenegen::Vocabulary>(sa::scenegen::Vocabulary::load(g.vocabulary));
}

json read_json(const std::string& path) { return sa::service::read_json_file(path); }

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw sa::Error(sa::ErrorCode::io_error, "cannot write " + path);
    out << body;
}

void print(const json& doc) { std::cout << doc.dump(2) << '\n'; }

sa::service::ServiceConfig service_config(const Globals& g) {
    sa::service::ServiceConfig cfg;
    if (!g.store.empty()) cfg.store_dir = fs::path(g.store);
    cfg.vocabulary = vocabulary_for(g);
    return cfg;
}

sa::service::HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sceneagent: video scene understanding pipeline"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--backend-profile", g.backend_profile, "backend profile JSON");
    app.add_option("--fixtures", g.fixtures, "scripted fixture table (forces the scripted backend)");
    app.add_option("--store", g.store, "session store directory");
    app.add_option("--vocabulary", g.vocabulary, "category vocabulary JSON (default: built-in clinical)");

    std::function<int()> action;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a media manifest and summarize it");
    std::string manifest_path;
    ingest->add_option("manifest", manifest_path, "manifest JSON")->required();
    ingest->callback([&] {
        action = [&] {
            const auto m = sa::media::load_manifest(manifest_path);
            print({{"video_id", m.video_id},
                   {"fps", m.fps},
                   {"frame_count", m.frame_count()},
                   {"duration_s", m.duration_s()},
                   {"transcript", m.transcript_path ? json(m.transcript_path->string()) : json(nullptr)}});
            return kExitOk;
        };
    });

    // sample
    auto* sample = app.add_subcommand("sample", "select keyframes by motion cues");
    std::optional<double> tau, tau_scene;
    std::optional<std::size_t> max_gap, edge;
    sample->add_option("manifest", manifest_path, "manifest JSON")->required();
    sample->add_option("--tau", tau, "motion threshold");
    sample->add_option("--tau-scene", tau_scene, "scene-change threshold");
    sample->add_option("--max-gap", max_gap, "fixed keyframe cadence in frames");
    sample->add_option("--edge", edge, "downscale edge length");
    sample->callback([&] {
        action = [&] {
            const auto m = sa::media::load_manifest(manifest_path);
            auto cfg = sa::media::SamplerConfig::defaults_for(m.fps);
            if (tau) cfg.motion_threshold = *tau;
            if (tau_scene) cfg.scene_threshold = *tau_scene;
            if (max_gap) cfg.max_gap = *max_gap;
            if (edge) cfg.downscale_edge = *edge;
            json out = json::array();
            for (const auto& kf : sa::media::select_keyframes(m, cfg)) {
                out.push_back({{"frame_index", kf.frame_index},
                               {"timestamp_s", kf.timestamp_s},
                               {"motion_score", kf.motion_score},
                               {"scene_boundary", kf.scene_boundary}});
            }
            print({{"video_id", m.video_id}, {"keyframes", out}});
            return kExitOk;
        };
    });

    // scenegen
    auto* scenegen = app.add_subcommand("scenegen", "build the scene graph of a video");
    std::string out_path;
    scenegen->add_option("manifest", manifest_path, "manifest JSON")->required();
    scenegen->add_option("--out", out_path, "write the graph JSON here");
    std::int64_t call_budget = sa::service::ServiceConfig{}.default_budget;
    scenegen->add_option("--budget", call_budget, "backend call budget")->check(CLI::NonNegativeNumber);
    scenegen->callback([&] {
        action = [&] {
            sa::service::Service svc(service_config(g), make_backend(g));
            const auto created = svc.create_session({{"manifest_path", manifest_path}, {"budget", call_budget}});
            const auto result = svc.generate_scene_graph(created["session_id"].get<std::string>());
            if (!out_path.empty()) write_text(out_path, result["graph"].dump() + "\n");
            for (const auto& w : result["warnings"]) std::cerr << "warning: " << w.get<std::string>() << '\n';
            json out = result;
            out["session_id"] = created["session_id"];
            print(out);
            return kExitOk;
        };
    });

    // ask
    auto* ask = app.add_subcommand("ask", "answer a question about a video with the agent");
    std::string question, index_path, trace_out;
    bool with_scenegen = false;
    sa::agent::AgentConfig agent_cfg;
    ask->add_option("manifest", manifest_path, "manifest JSON")->required();
    ask->add_option("question", question, "question text")->required();
    ask->add_flag("--scenegen", with_scenegen, "generate the scene graph before asking");
    ask->add_option("--index", index_path, "retrieval index snapshot");
    ask->add_option("--k", agent_cfg.k_samples, "confidence samples");
    ask->add_option("--max-steps", agent_cfg.max_steps, "agent step limit");
    ask->add_option("--threshold", agent_cfg.confidence_threshold, "confidence threshold");
    ask->add_option("--trace-out", trace_out, "write the agent trace JSON here");
    ask->add_option("--budget", call_budget, "backend call budget")->check(CLI::NonNegativeNumber);
    ask->callback([&] {
        action = [&] {
            auto cfg = service_config(g);
            cfg.agent = agent_cfg;
            sa::service::Service svc(cfg, make_backend(g));
            json body{{"manifest_path", manifest_path}, {"budget", call_budget}};
            if (!index_path.empty()) body["index_path"] = index_path;
            const auto id = svc.create_session(body)["session_id"].get<std::string>();
            if (with_scenegen) svc.generate_scene_graph(id);
            auto answer = svc.ask(id, question);
            const auto trace = svc.get_trace(answer["trace_ref"].get<std::string>());
            if (!trace_out.empty()) write_text(trace_out, trace.dump(2) + "\n");
            answer["session_id"] = id;
            print(answer);
            return kExitOk;
        };
    });

    // graphqa
    auto* graphqa = app.add_subcommand("graphqa", "run a graph query against a scene graph file");
    std::string graph_path, query;
    graphqa->add_option("graph", graph_path, "scene graph JSON")->required();
    graphqa->add_option("query", query, "query text")->required();
    graphqa->callback([&] {
        action = [&] {
            const auto graph = sa::scenegen::graph_from_json(read_json(graph_path));
            const auto ast = sa::graphqa::parse_query(query);
            sa::graphqa::check_query(ast);
            print(sa::graphqa::result_to_json(sa::graphqa::execute(ast, graph)));
            return kExitOk;
        };
    });

    // retrieve-ingest
    auto* rin = app.add_subcommand("retrieve-ingest", "chunk and index a reference corpus");
    std::string corpus_path;
    std::size_t chunk_size = 512;
    bool backend_entities = false;
    rin->add_option("corpus", corpus_path, "corpus manifest {doc_id: path}")->required();
    rin->add_option("--out", out_path, "index snapshot path")->required();
    rin->add_option("--chunk-size", chunk_size, "chunk size in bytes (>= 128)");
    rin->add_flag("--backend-entities", backend_entities, "let the backend add entities to chunks");
    rin->callback([&] {
        action = [&] {
            const auto docs = sa::retrieval::load_corpus(corpus_path);
            const auto vocab = vocabulary_for(g);
            const auto& v = vocab ? *vocab : sa::scenegen::Vocabulary::clinical();
            std::optional<sa::backend::ModelClient> client;
            if (backend_entities) client = make_backend(g);
            const auto index = sa::retrieval::ingest_corpus(docs, chunk_size, v, client ? &*client : nullptr);
            sa::retrieval::save_index(index, out_path);
            print({{"chunks", index.chunks.size()}, {"entities", index.graph.entity_chunks.size()}, {"out", out_path}});
            return kExitOk;
        };
    });

    // retrieve
    auto* ret = app.add_subcommand("retrieve", "query a retrieval index");
    sa::retrieval::FusionConfig fusion;
    ret->add_option("index", index_path, "index snapshot")->required();
    ret->add_option("query", query, "query text")->required();
    ret->add_option("--alpha", fusion.alpha, "vector weight");
    ret->add_option("--beta", fusion.beta, "graph weight");
    ret->add_option("--top-k", fusion.top_k_vector, "vector candidates");
    ret->add_option("--top-n", fusion.top_n, "results");
    ret->callback([&] {
        action = [&] {
            const auto index = sa::retrieval::load_index(index_path);
            const auto vocab = vocabulary_for(g);
            const auto hits = sa::retrieval::retrieve(index, query, vocab ? *vocab : sa::scenegen::Vocabulary::clinical(), fusion);
            print(sa::retrieval::hits_to_json(hits, index));
            return kExitOk;
        };
    });

    // eval
    auto* ev = app.add_subcommand("eval", "score a QA set and aggregate a report");
    std::string qa_path, predictions_path, videos_path, records_out, format = "text";
    ev->add_option("qa", qa_path, "QA JSON-lines file")->required();
    auto* preds_opt = ev->add_option("--predictions", predictions_path, "JSON lines {item_id, answer, confidence?, abstained?}");
    auto* videos_opt = ev->add_option("--videos", videos_path, "JSON map video_id -> manifest path; runs the agent");
    preds_opt->excludes(videos_opt);
    ev->add_option("--out", out_path, "write the report JSON here");
    ev->add_option("--records", records_out, "write run records (JSON lines) here");
    ev->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    ev->callback([&] {
        action = [&]() -> int {
            const auto items = sa::eval::load_qa(qa_path);
            auto client = make_backend(g);
            std::map<std::string, sa::eval::Prediction> predictions;
            std::map<std::string, std::int64_t> latency;
            if (!predictions_path.empty()) {
                std::ifstream in(predictions_path);
                if (!in) throw sa::Error(sa::ErrorCode::io_error, "cannot read " + predictions_path);
                std::string line;
                while (std::getline(in, line)) {
                    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
                    const auto doc = json::parse(line);
                    predictions[doc.at("item_id").get<std::string>()] = {
                        doc.at("answer").get<std::string>(), doc.value("confidence", 1.0), doc.value("abstained", false)};
                }
            } else if (!videos_path.empty()) {
                const auto videos = read_json(videos_path);
                sa::service::Service svc(service_config(g), client);
                std::map<std::string, std::string> session_for;
                for (const auto& item : items) {
                    if (!session_for.contains(item.video_id)) {
                        const auto base = fs::path(videos_path).parent_path();
                        const auto path = base / videos.at(item.video_id).get<std::string>();
                        const auto id = svc.create_session({{"manifest_path", path.string()}})["session_id"].get<std::string>();
                        svc.generate_scene_graph(id);
                        session_for[item.video_id] = id;
                    }
                    const auto start = std::chrono::steady_clock::now();
                    const auto r = svc.ask(session_for[item.video_id], sa::eval::render_question(item));
                    latency[item.item_id] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                                std::chrono::steady_clock::now() - start)
                                                .count();
                    predictions[item.item_id] = {r["answer"].get<std::string>(), r["confidence"].get<double>(),
                                                 r["abstained"].get<bool>()};
                }
            } else {
                throw CLI::ValidationError("eval needs --predictions or --videos");
            }
            std::vector<sa::eval::RunRecord> records;
            std::string records_text;
            for (const auto& item : items) {
                sa::eval::RunRecord r;
                if (auto it = predictions.find(item.item_id); it != predictions.end()) {
                    r = sa::eval::score_item(item, it->second, &client, latency[item.item_id]);
                } else {
                    r.item_id = item.item_id;
                    r.error = "no prediction";
                }
                records_text += sa::eval::record_to_json(r).dump() + "\n";
                records.push_back(std::move(r));
            }
            const auto report = sa::eval::aggregate(records, items);
            if (!records_out.empty()) write_text(records_out, records_text);
            if (!out_path.empty()) write_text(out_path, sa::eval::report_to_json(report).dump(2) + "\n");
            std::cout << sa::eval::format_report(report, format == "json" ? sa::eval::ReportStyle::json
                                                                           : sa::eval::ReportStyle::text);
            return report.errored > 0 ? kExitData : kExitOk;
        };
    });

    // serve
    auto* serve = app.add_subcommand("serve", "run the HTTP service");
    std::string host = "127.0.0.1", token;
    int port = 8080;
    std::int64_t budget = 200;
    serve->add_option("--host", host, "bind address");
    serve->add_option("--port", port, "bind port");
    serve->add_option("--index", index_path, "default retrieval index snapshot");
    serve->add_option("--budget", budget, "per-session backend call budget");
    serve->add_option("--token", token, "require this bearer token");
    serve->callback([&] {
        action = [&] {
            auto cfg = service_config(g);
            cfg.default_budget = budget;
            if (!index_path.empty()) {
                cfg.default_index = std::make_shared<sa::retrieval::RetrievalIndex>(sa::retrieval::load_index(index_path));
            }
            sa::service::Service svc(cfg, make_backend(g));
            sa::service::HttpServer server(svc, token.empty() ? std::nullopt : std::optional<std::string>(token));
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "listening on " << host << ":" << port << '\n';
            server.run(host, port);
            g_server = nullptr;
            return kExitOk;
        };
    });

    // report
    auto* rep = app.add_subcommand("report", "render a report, optionally with comparison rows or reconciliation");
    std::string report_path, comparison_path, reconcile_path;
    rep->add_option("report", report_path, "report JSON, or a counts file [{task_type, correct, total}]")->required();
    rep->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));
    rep->add_option("--comparison", comparison_path, "JSON object label -> score");
    rep->add_option("--reconcile", reconcile_path, "published table JSON to check");
    rep->callback([&] {
        action = [&]() -> int {
            const auto doc = read_json(report_path);
            sa::eval::BenchmarkReport report;
            if (doc.is_array()) {
                std::vector<sa::eval::CategoryReport> rows;
                for (const auto& r : doc) {
                    rows.push_back({r.at("task_type").get<std::string>(), r.at("correct").get<std::int64_t>(),
                                    r.at("total").get<std::int64_t>()});
                }
                report = sa::eval::aggregate_counts(rows);
            } else {
                report = sa::eval::report_from_json(doc);
            }
            if (!comparison_path.empty()) {
                const auto comparison = read_json(comparison_path);
                for (const auto& [label, score] : comparison.items()) {
                    report.comparison.push_back({label, score.get<double>()});
                }
            }
            std::cout << sa::eval::format_report(report, format == "json" ? sa::eval::ReportStyle::json
                                                                           : sa::eval::ReportStyle::text);
            if (!reconcile_path.empty()) {
                const auto table = sa::eval::published_from_json(read_json(reconcile_path));
                const auto issues = sa::eval::reconcile(table);
                std::cout << "reconcile " << (issues.empty() ? "clean" : std::to_string(issues.size()) + " discrepancies")
                          << '\n';
                for (const auto& d : issues) {
                    std::cout << "  " << d.where << " " << d.field << ": printed " << d.printed << ", computed "
                              << d.computed << '\n';
                }
            }
            return kExitOk;
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }
    try {
        return action ? action() : kExitUsage;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage: " << e.what() << '\n';
        return kExitUsage;
    } catch (const sa::service::ApiError& e) {
        std::cerr << "error [" << sa::service::to_string(e.code()) << "]: " << e.what() << '\n';
        if (!e.detail().is_null()) std::cerr << e.detail().dump() << '\n';
        return exit_code_for(e);
    } catch (const sa::Error& e) {
        std::cerr << "error [" << sa::to_string(e.code()) << "]: " << e.what() << '\n';
        if (!e.detail().is_null()) std::cerr << e.detail().dump() << '\n';
        return is_backend_code(e.code()) ? kExitBackend : kExitData;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
}
