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

#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <variant>

#include "sceneagent/error.hpp"
#include "sceneagent/media/transcript.hpp"
#include "sceneagent/scenegen/relations.hpp"
#include "sceneagent/scenegen/vocabulary.hpp"

namespace sceneagent::testing {

namespace fs = std::filesystem;
using nlohmann::json;

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("sceneagent-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& body) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << body;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_video(const fs::path& dir, const std::vector<std::uint8_t>& levels, double fps, std::size_t width,
                     std::size_t height, const std::string& video_id) {
    std::vector<media::LuminanceFrame> frames;
    for (std::size_t i = 0; i < levels.size(); ++i) frames.push_back(media::solid_frame(width, height, levels[i], i));
    return write_video(dir, frames, fps, video_id);
}

fs::path write_video(const fs::path& dir, const std::vector<media::LuminanceFrame>& frames, double fps,
                     const std::string& video_id) {
    fs::create_directories(dir / "frames");
    json paths = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frames/f%04zu.pgm", i);
        media::write_pgm(dir / name, frames[i]);
        paths.push_back(name);
    }
    const auto manifest = dir / "manifest.json";
    write_text(manifest, json{{"video_id", video_id}, {"fps", fps}, {"frames", paths}, {"transcript", nullptr}}.dump());
    return manifest;
}

media::LuminanceFrame random_frame(std::mt19937_64& rng, std::size_t width, std::size_t height) {
    media::LuminanceFrame f;
    f.width = width;
    f.height = height;
    f.pixels.resize(width * height);
    std::uniform_int_distribution<int> px(0, 255);
    for (auto& p : f.pixels) p = static_cast<std::uint8_t>(px(rng));
    return f;
}

namespace {

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& xs) {
    return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
}

bool chance(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

}  // namespace

scenegen::SceneGraph random_graph(std::mt19937_64& rng, std::size_t max_nodes, std::size_t max_edges) {
    const auto& vocab = scenegen::Vocabulary::clinical();
    scenegen::SceneGraph g;
    g.video_id = "rand";
    g.fps = pick(rng, std::vector<double>{1.0, 2.5, 25.0});
    g.vocabulary_version = vocab.version();

    const std::size_t n_nodes = std::uniform_int_distribution<std::size_t>(2, std::max<std::size_t>(2, max_nodes))(rng);
    std::uniform_int_distribution<std::size_t> frame(0, 20);
    std::map<std::string, std::size_t> ordinals;
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const auto& cat = pick(rng, vocab.categories());
        scenegen::SceneNode n;
        n.id = cat.id + "#" + std::to_string(ordinals[cat.id]++);
        n.category = cat.id;
        std::size_t a = frame(rng), b = frame(rng);
        n.first_frame = std::min(a, b);
        n.last_frame = std::max(a, b);
        n.attrs["kind"] = std::string(scenegen::to_string(cat.kind));
        if (chance(rng, 0.5)) n.attrs["label"] = cat.synonyms.front();
        n.provenance.push_back({n.first_frame, {double(frame(rng)), 2.0, 10.5, 4.25}});
        if (n.last_frame != n.first_frame) n.provenance.push_back({n.last_frame, {1.0, 1.0, 3.0, 3.0}});
        g.nodes.emplace(n.id, n);
    }

    std::vector<std::string> ids;
    std::size_t lo = 1000, hi = 0;
    for (const auto& [id, n] : g.nodes) {
        ids.push_back(id);
        lo = std::min(lo, n.first_frame);
        hi = std::max(hi, n.last_frame);
    }
    const auto& relations = scenegen::spatial_vocabulary();
    const std::size_t n_edges = std::uniform_int_distribution<std::size_t>(0, max_edges)(rng);
    std::uniform_int_distribution<std::size_t> span(lo, hi);
    std::set<std::string> used;
    for (std::size_t i = 0; i < n_edges; ++i) {
        scenegen::SceneEdge e;
        do {
            char buf[16];
            std::snprintf(buf, sizeof buf, "e%03zu", std::uniform_int_distribution<std::size_t>(0, 999)(rng));
            e.id = buf;
        } while (!used.insert(e.id).second);
        e.src = pick(rng, ids);
        do {
            e.dst = pick(rng, ids);
        } while (e.dst == e.src);
        e.relation = pick(rng, relations);
        std::size_t a = span(rng), b = span(rng);
        e.t_start = std::min(a, b);
        e.t_end = std::max(a, b);
        e.confidence = pick(rng, std::vector<double>{0.25, 0.5, 0.75, 1.0});
        e.provenance = {e.t_start};
        if (e.t_end != e.t_start) e.provenance.push_back(e.t_end);
        g.edges.emplace(e.id, e);
    }
    g.validate();
    return g;
}

graphqa::QueryAst random_query(std::mt19937_64& rng, const scenegen::SceneGraph& graph) {
    using namespace graphqa;
    std::vector<std::string> labels{"instrument", "anatomy", "person", "equipment", "other", "widget"};
    for (const auto& [id, n] : graph.nodes) labels.push_back(n.category);
    std::vector<std::string> relations = scenegen::spatial_vocabulary();
    relations.push_back("juggles");

    QueryAst q;
    q.form = pick(rng, std::vector<QueryForm>{QueryForm::match, QueryForm::match, QueryForm::count, QueryForm::exists});
    auto vars = pick(rng, std::vector<std::vector<std::string>>{{"a", "r", "b"}, {"src", "rel", "dst"}, {"x1", "e_", "y2"}});
    q.src.var = vars[0];
    q.edge.var = vars[1];
    q.dst.var = vars[2];
    if (chance(rng, 0.7)) q.src.label = pick(rng, labels);
    if (chance(rng, 0.6)) q.edge.relation = pick(rng, relations);
    if (chance(rng, 0.6)) q.dst.label = pick(rng, labels);

    const std::size_t n_where = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
    for (std::size_t i = 0; i < n_where; ++i) {
        Condition c;
        const bool on_edge = chance(rng, 0.5);
        c.var = on_edge ? q.edge.var : (chance(rng, 0.5) ? q.src.var : q.dst.var);
        std::vector<Field> fields = on_edge ? std::vector<Field>{Field::relation, Field::t_start, Field::t_end, Field::confidence}
                                            : std::vector<Field>{Field::category, Field::t_start, Field::t_end};
        c.field = pick(rng, fields);
        if (c.field == Field::relation || c.field == Field::category) {
            c.op = pick(rng, std::vector<CompareOp>{CompareOp::eq, CompareOp::ne});
            c.literal.is_string = true;
            c.literal.text = c.field == Field::relation ? pick(rng, relations) : pick(rng, labels);
        } else {
            c.op = pick(rng, std::vector<CompareOp>{CompareOp::eq, CompareOp::ne, CompareOp::lt, CompareOp::le,
                                                    CompareOp::gt, CompareOp::ge});
            if (c.field == Field::confidence) {
                c.literal.text = pick(rng, std::vector<std::string>{"0.25", "0.5", "0.75", "1"});
            } else {
                c.literal.text = std::to_string(std::uniform_int_distribution<int>(0, 20)(rng));
            }
            c.literal.number = std::stod(c.literal.text);
        }
        q.where.push_back(c);
    }
    if (q.form == QueryForm::match) {
        q.selector = pick(rng, vars);
        q.order = pick(rng, std::vector<Order>{Order::none, Order::latest, Order::earliest});
        if (chance(rng, 0.4)) q.limit = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
    }
    return q;
}

namespace {

bool oracle_label(const scenegen::SceneNode& n, const std::string& label) {
    if (n.category == label) return true;
    const auto it = n.attrs.find("kind");
    return it != n.attrs.end() && it->second == label;
}

template <typename T>
bool oracle_cmp(const T& l, graphqa::CompareOp op, const T& r) {
    using graphqa::CompareOp;
    if (op == CompareOp::eq) return l == r;
    if (op == CompareOp::ne) return !(l == r);
    if (op == CompareOp::lt) return l < r;
    if (op == CompareOp::le) return !(r < l);
    if (op == CompareOp::gt) return r < l;
    return !(l < r);
}

bool oracle_condition(const graphqa::Condition& c, const graphqa::QueryAst& q, const scenegen::SceneEdge& e,
                      const scenegen::SceneGraph& g) {
    using graphqa::Field;
    if (c.var == q.edge.var) {
        if (c.field == Field::relation) return oracle_cmp(e.relation, c.op, c.literal.text);
        if (c.field == Field::confidence) return oracle_cmp(e.confidence, c.op, c.literal.number);
        const double v = double(c.field == Field::t_start ? e.t_start : e.t_end);
        return oracle_cmp(v, c.op, c.literal.number);
    }
    const auto& n = g.nodes.at(c.var == q.src.var ? e.src : e.dst);
    if (c.field == Field::category) return oracle_cmp(n.category, c.op, c.literal.text);
    const double v = double(c.field == Field::t_start ? n.first_frame : n.last_frame);
    return oracle_cmp(v, c.op, c.literal.number);
}

}  // namespace

OracleResult brute_force(const graphqa::QueryAst& q, const scenegen::SceneGraph& g) {
    using graphqa::Order;
    using graphqa::QueryForm;
    std::vector<const scenegen::SceneEdge*> hits;
    for (const auto& [id, e] : g.edges) {
        bool ok = true;
        if (q.src.label) ok = ok && oracle_label(g.nodes.at(e.src), *q.src.label);
        if (q.edge.relation) ok = ok && e.relation == *q.edge.relation;
        if (q.dst.label) ok = ok && oracle_label(g.nodes.at(e.dst), *q.dst.label);
        for (const auto& c : q.where) ok = ok && oracle_condition(c, q, e, g);
        if (ok) hits.push_back(&e);
    }
    OracleResult out;
    if (q.form != QueryForm::match) {
        for (const auto* e : hits) out.chosen_ids.push_back(e->id);
        out.value = q.form == QueryForm::count ? json(hits.size()) : json(!hits.empty());
        return out;
    }
    // Selection by repeated arg-best rather than sorting.
    std::vector<const scenegen::SceneEdge*> chosen;
    if (q.order == Order::none) {
        const std::size_t n = q.limit ? std::min(*q.limit, hits.size()) : hits.size();
        chosen.assign(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n));
    } else {
        const std::size_t n = std::min(q.limit.value_or(1), hits.size());
        auto pool = hits;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < pool.size(); ++j) {
                const auto* a = pool[j];
                const auto* b = pool[best];
                bool better;
                if (q.order == Order::latest) {
                    better = a->t_end > b->t_end || (a->t_end == b->t_end && a->id < b->id);
                } else {
                    better = a->t_start < b->t_start || (a->t_start == b->t_start && a->id < b->id);
                }
                if (better) best = j;
            }
            chosen.push_back(pool[best]);
            pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
        }
    }
    for (const auto* e : chosen) {
        const std::string& sel = *q.selector;
        const std::string id = sel == q.edge.var ? e->id : (sel == q.src.var ? e->src : e->dst);
        out.rows.push_back({{sel, id}});
        out.chosen_ids.push_back(e->id);
    }
    return out;
}

scenegen::SceneGraph two_edge_contacts_graph() {
    scenegen::SceneGraph g;
    g.video_id = "or-demo";
    g.fps = 1.0;
    g.vocabulary_version = scenegen::Vocabulary::clinical().version();
    auto node = [&](const std::string& id, const std::string& category, const std::string& kind, std::size_t first,
                    std::size_t last) {
        scenegen::SceneNode n;
        n.id = id;
        n.category = category;
        n.first_frame = first;
        n.last_frame = last;
        n.attrs["kind"] = kind;
        n.provenance = {{first, {10, 10, 20, 20}}, {last, {12, 10, 20, 20}}};
        g.nodes.emplace(id, n);
    };
    node("scalpel#0", "scalpel", "instrument", 30, 46);
    node("forceps#0", "forceps", "instrument", 60, 80);
    node("tissue_region#0", "tissue_region", "anatomy", 30, 80);
    g.edges.emplace("e1", scenegen::SceneEdge{"e1", "scalpel#0", "tissue_region#0", "contacts", 30, 46, 1.0, {30, 46}});
    g.edges.emplace("e2", scenegen::SceneEdge{"e2", "forceps#0", "tissue_region#0", "contacts", 60, 80, 1.0, {60, 80}});
    g.validate();
    return g;
}

std::vector<retrieval::Document> fixture_corpus() {
    return {
        {"guidelines",
         "Pass the scalpel handle first. Return the scalpel to the tray after each incision.\n\n"
         "Confirm the swab count aloud before closure begins."},
        {"tray_care", "Wipe the instrument tray with disinfectant between procedures."},
        {"monitoring", "Check the vital signs monitor every five minutes during sedation."},
    };
}

media::Transcript fixture_transcript() {
    media::Transcript t;
    t.utterances = {
        {0.0, 2.0, "surgeon", "Scalpel, please."},
        {3.0, 5.0, "nurse", "Clamp is ready on the tray."},
        {6.0, 8.0, "surgeon", "Hold the retractor there."},
        {9.0, 11.0, "surgeon", "Apply the CLAMP to the vessel now."},
        {12.0, 14.0, "nurse", "Counting swabs."},
    };
    return t;
}

std::string prompt_of(const backend::ChatRequest& req) {
    for (const auto& m : req.messages) {
        for (const auto& p : m.parts) {
            if (const auto* t = std::get_if<backend::TextPart>(&p)) return t->text;
        }
    }
    return {};
}

backend::ModelClient scripted_client(backend::FixtureTable fixtures) {
    backend::BackendProfile profile;
    profile.name = "fixtures";
    return backend::ModelClient(profile, std::make_shared<backend::ScriptedTransport>(std::move(fixtures)));
}

backend::ModelClient record_then_replay(const std::function<std::string(const backend::ChatRequest&)>& responder,
                                        const std::function<void(const backend::ModelClient&)>& drive) {
    auto recorder = std::make_shared<backend::RecordingTransport>([&](const backend::ChatRequest& req) {
        return backend::ChatResponse{responder(req), backend::FinishReason::stop, std::nullopt};
    });
    backend::BackendProfile profile;
    profile.name = "fixtures";
    drive(backend::ModelClient(profile, recorder));
    return scripted_client(recorder->fixtures());
}

backend::ModelClient rule_client(std::function<std::string(const backend::ChatRequest&)> rule) {
    backend::BackendProfile profile;
    profile.name = "rules";
    auto transport = std::make_shared<backend::RecordingTransport>([rule = std::move(rule)](const backend::ChatRequest& req) {
        return backend::ChatResponse{rule(req), backend::FinishReason::stop, std::nullopt};
    });
    return backend::ModelClient(profile, transport);
}

std::optional<std::size_t> prompted_keyframe(const backend::ChatRequest& req) {
    static const std::regex re(R"(keyframe (\d+))");
    const auto prompt = prompt_of(req);
    std::smatch m;
    if (!std::regex_search(prompt, m, re)) return std::nullopt;
    return std::stoul(m[1].str());
}

std::string clinic_reply(const backend::ChatRequest& req, bool forceps_later) {
    const auto kf = prompted_keyframe(req);
    if (!kf) return "Final Answer: forceps";
    nlohmann::json entities = nlohmann::json::array();
    if (*kf == 0 || !forceps_later) {
        entities.push_back({{"label", "scalpel"}, {"bbox", {0, 0, 4, 3}}, {"track_hint", "s1"}, {"confidence", 0.9}});
    } else {
        entities.push_back({{"label", "forceps"}, {"bbox", {3, 3, 4, 3}}, {"track_hint", "f1"}, {"confidence", 0.9}});
    }
    entities.push_back({{"label", "tissue region"}, {"bbox", {3, 0, 5, 6}}, {"track_hint", "t1"}, {"confidence", 0.8}});
    return nlohmann::json{{"caption", "instrument on tissue"}, {"entities", entities}, {"relations", nlohmann::json::array()}}
        .dump();
}

agent::AgentContext ScenarioWorld::context() const {
    agent::AgentContext ctx;
    ctx.transcript = &transcript;
    ctx.index = &index;
    ctx.graph = &graph;
    ctx.vocabulary = &scenegen::Vocabulary::clinical();
    return ctx;
}

ScenarioWorld scenario_world() {
    const auto docs = fixture_corpus();
    return ScenarioWorld{fixture_transcript(), retrieval::ingest_corpus(docs, 512, scenegen::Vocabulary::clinical()),
                         two_edge_contacts_graph()};
}

std::string scenario_question(Scenario s) {
    switch (s) {
        case Scenario::immediate: return "Which instrument is on the tray?";
        case Scenario::tool_then_answer: return "When was the clamp requested?";
        case Scenario::fallback_abstain: return "Which instrument goes back to the tray after the incision?";
    }
    return {};
}

std::string scenario_reply(Scenario s, const backend::ChatRequest& req) {
    const auto prompt = prompt_of(req);
    switch (s) {
        case Scenario::immediate: {
            static const char* forms[] = {"Thought: the tray holds one blade\nFinal Answer: scalpel",
                                          "Final Answer: Scalpel.", "Final Answer: the scalpel"};
            return forms[req.sample_index % 3];
        }
        case Scenario::tool_then_answer:
            if (prompt.find("Observation:") == std::string::npos) {
                return "Thought: check speech\nAction: transcript_search {\"needle\":\"clamp\"}";
            }
            return "Thought: the nurse mentions it first\nFinal Answer: at 3.0 s";
        case Scenario::fallback_abstain: {
            static const char* forms[] = {"Final Answer: A", "Final Answer: B", "Final Answer: C"};
            return forms[req.sample_index % 3];
        }
    }
    return {};
}

std::vector<ScenarioRun> run_scenario(Scenario s, std::size_t runs) {
    const auto world = scenario_world();
    const auto ctx = world.context();
    const auto registry = agent::default_registry();
    const agent::AgentConfig cfg;
    const auto question = scenario_question(s);

    backend::FixtureTable fixtures;
    {
        auto recorder = std::make_shared<backend::RecordingTransport>([&](const backend::ChatRequest& req) {
            return backend::ChatResponse{scenario_reply(s, req), backend::FinishReason::stop, std::nullopt};
        });
        backend::BackendProfile profile;
        profile.name = "fixtures";
        agent::run_agent(question, ctx, registry, cfg, backend::ModelClient(profile, recorder));
        fixtures = recorder->fixtures();
    }

    std::vector<ScenarioRun> out;
    for (std::size_t i = 0; i < runs; ++i) {
        auto log = std::make_shared<backend::CallLog>();
        const auto client = scripted_client(fixtures).with_session(nullptr, log);
        ScenarioRun run;
        run.trace = agent::run_agent(question, ctx, registry, cfg, client);
        run.trace_json = agent::trace_to_json(run.trace).dump();
        run.log = log->snapshot();
        out.push_back(std::move(run));
    }
    return out;
}

}  // namespace sceneagent::testing
