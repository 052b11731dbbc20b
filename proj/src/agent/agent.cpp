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

#include "sceneagent/agent/agent.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "assets.hpp"
#include "sceneagent/error.hpp"
#include "sceneagent/graphqa/execute.hpp"
#include "sceneagent/graphqa/query.hpp"
#include "sceneagent/retrieval/search.hpp"
#include "sceneagent/scenegen/relations.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::agent {

using nlohmann::json;

// ---- registry ---------------------------------------------------------------

void ToolRegistry::add(ToolSpec spec) {
    const bool valid = !spec.name.empty() && std::all_of(spec.name.begin(), spec.name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || c == '_';
    });
    if (!valid) throw Error(ErrorCode::invalid_argument, "tool name must match [a-z_]+: " + spec.name);
    if (find(spec.name)) throw Error(ErrorCode::invalid_argument, "duplicate tool " + spec.name);
    tools_.push_back(std::move(spec));
}

const ToolSpec* ToolRegistry::find(std::string_view name) const {
    for (const auto& t : tools_) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::string ToolRegistry::render() const {
    std::string out;
    for (const auto& t : tools_) {
        std::string args;
        for (const auto& a : t.args) {
            if (!args.empty()) args += ", ";
            args += "\"" + a.name + "\": " + a.type + (a.required ? "" : "?");
        }
        out += "- " + t.name + " {" + args + "}: " + t.description + "\n";
    }
    return out;
}

namespace {

std::string require_string(const json& args, const char* key) {
    if (!args.is_object() || !args.contains(key) || !args[key].is_string()) {
        throw Error(ErrorCode::invalid_argument, std::string("missing string argument '") + key + "'");
    }
    return args[key].get<std::string>();
}

std::string latest_keyframe_line(const AgentContext& ctx) {
    if (!ctx.keyframes || ctx.keyframes->empty()) return "";
    const auto& kf = ctx.keyframes->back();
    return "Current keyframe: frame " + std::to_string(kf.frame_index) + " at t=" + text::fixed1(kf.timestamp_s) + "s\n";
}

std::string video_qa(const json& args, const AgentContext& ctx, const backend::ModelClient& client) {
    const auto question = require_string(args, "question");
    std::string context = ctx.buffer ? media::buffer_context(*ctx.buffer, ctx.transcript, ctx.context_chars) : "";
    backend::ChatMessage msg;
    msg.role = backend::Role::user;
    msg.parts.push_back(backend::TextPart{latest_keyframe_line(ctx) + "Video context:\n" +
                                          (context.empty() ? "(none)" : context) + "\nQuestion: " + question +
                                          "\nAnswer briefly."});
    if (ctx.manifest && ctx.keyframes && !ctx.keyframes->empty()) {
        const auto idx = ctx.keyframes->back().frame_index;
        msg.parts.push_back(backend::ImageRef{ctx.manifest->frame_paths.at(idx), idx});
    }
    backend::ChatRequest req;
    req.messages.push_back(std::move(msg));
    return text::trim(client.complete(std::move(req)).text);
}

std::string transcript_tool(const json& args, const AgentContext& ctx, const backend::ModelClient&) {
    if (!ctx.transcript) throw Error(ErrorCode::invalid_argument, "no transcript loaded");
    const auto hits = media::transcript_search(*ctx.transcript, require_string(args, "needle"));
    if (hits.empty()) return "no matching speech";
    std::string out;
    for (const auto& u : hits) out += (out.empty() ? "" : "\n") + media::render_utterance(u);
    return out;
}

/// Natural-language question to query text through the translation prompt.
/// The reply still has to parse; nothing it says is trusted otherwise.
std::string translate_question(const std::string& question, const AgentContext& ctx, const backend::ModelClient& client) {
    const auto& vocab = ctx.vocabulary ? *ctx.vocabulary : scenegen::Vocabulary::clinical();
    std::string labels;
    for (const auto& c : vocab.categories()) labels += (labels.empty() ? "" : ", ") + c.id;
    for (const auto kind : {"instrument", "anatomy", "person", "equipment", "other"}) labels += std::string(", ") + kind;
    std::string relations;
    for (const auto& r : scenegen::spatial_vocabulary()) relations += (relations.empty() ? "" : ", ") + r;
    backend::ChatRequest req;
    req.messages.push_back(backend::ChatMessage::text(
        backend::Role::user,
        text::render_template(assets::k_nl_to_query_v1_txt,
                              {{"labels", labels}, {"relations", relations}, {"question", question}})));
    req.max_tokens = 128;
    auto reply = text::trim(client.complete(std::move(req)).text);
    if (const auto nl = reply.find('\n'); nl != std::string::npos) reply = text::trim(reply.substr(0, nl));
    return reply;
}

std::string graph_query_tool(const json& args, const AgentContext& ctx, const backend::ModelClient& client) {
    if (!ctx.graph) throw Error(ErrorCode::conflict, "no scene graph generated");
    std::string query_text;
    if (args.contains("query")) {
        query_text = require_string(args, "query");
    } else if (args.contains("question")) {
        query_text = translate_question(require_string(args, "question"), ctx, client);
    } else {
        throw Error(ErrorCode::invalid_argument, "graph_query needs \"query\" or \"question\"");
    }
    const auto ast = graphqa::parse_query(query_text);
    graphqa::check_query(ast);
    const auto result = graphqa::execute(ast, *ctx.graph);
    std::string out;
    if (result.value) {
        out = "value: " + result.value->dump();
    } else if (result.rows.empty()) {
        out = "no results";
    } else {
        for (const auto& row : result.rows) {
            std::string line;
            for (const auto& [var, id] : row) line += (line.empty() ? "" : " ") + var + "=" + id;
            out += (out.empty() ? "" : "\n") + line;
        }
    }
    if (!args.contains("query")) out = "query: " + graphqa::render_query(ast) + "\n" + out;
    if (!result.trace.chosen_ids.empty()) {
        std::string ids;
        for (const auto& id : result.trace.chosen_ids) ids += (ids.empty() ? "" : ",") + id;
        out += "\nchosen: " + ids;
    }
    return out;
}

std::string retrieve_with(const std::string& query, const AgentContext& ctx, std::size_t top_n) {
    if (!ctx.index) throw Error(ErrorCode::invalid_argument, "no reference index loaded");
    retrieval::FusionConfig cfg;
    cfg.top_n = top_n;
    const auto& vocab = ctx.vocabulary ? *ctx.vocabulary : scenegen::Vocabulary::clinical();
    const auto hits = retrieval::retrieve(*ctx.index, query, vocab, cfg);
    return retrieval::render_hits(hits, *ctx.index);
}

std::string retrieve_tool(const json& args, const AgentContext& ctx, const backend::ModelClient&) {
    return retrieve_with(require_string(args, "query"), ctx, retrieval::FusionConfig{}.top_n);
}

}  // namespace

ToolRegistry default_registry() {
    ToolRegistry r;
    r.add({"video_qa", "ask the vision model about the current keyframe and recent observations",
           {{"question", "string", true}}, video_qa});
    r.add({"transcript_search", "find speech segments containing a phrase", {{"needle", "string", true}},
           transcript_tool});
    r.add({"graph_query", "run a scene graph query, e.g. MATCH (a:instrument)-[r:contacts]->(b:tissue_region) RETURN a LATEST",
           {{"query", "string", false}, {"question", "string", false}}, graph_query_tool});
    r.add({"retrieve", "search the reference guidelines", {{"query", "string", true}}, retrieve_tool});
    r.add({"final_answer", "give the final answer (or write \"Final Answer: <text>\")", {{"answer", "string", true}},
           [](const json& args, const AgentContext&, const backend::ModelClient&) { return args.at("answer").get<std::string>(); }});
    return r;
}

void AgentConfig::validate() const {
    if (max_steps < 1) throw Error(ErrorCode::invalid_argument, "max_steps must be >= 1");
    if (k_samples < 1) throw Error(ErrorCode::invalid_argument, "k_samples must be >= 1");
    if (confidence_threshold < 0.0 || confidence_threshold > 1.0) {
        throw Error(ErrorCode::invalid_argument, "confidence_threshold must be in [0,1]");
    }
}

// ---- grammar ----------------------------------------------------------------

namespace {

std::string_view ltrim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    return s;
}

/// Length of the balanced JSON object at the start of s, or npos.
std::size_t object_extent(std::string_view s) {
    if (s.empty() || s.front() != '{') return std::string_view::npos;
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i + 1;
        }
    }
    return std::string_view::npos;
}

std::optional<ParsedAction> try_action(std::string_view rest) {
    rest = ltrim(rest);
    std::size_t n = 0;
    while (n < rest.size() && ((rest[n] >= 'a' && rest[n] <= 'z') || rest[n] == '_')) ++n;
    if (n == 0) return std::nullopt;
    ParsedAction a;
    a.kind = ActionKind::tool;
    a.tool = std::string(rest.substr(0, n));
    if (n < rest.size() && !std::isspace(static_cast<unsigned char>(rest[n])) && rest[n] != '{') return std::nullopt;
    auto body = ltrim(rest.substr(n));
    const auto extent = object_extent(body);
    if (extent == std::string_view::npos) return std::nullopt;
    try {
        a.args = json::parse(body.substr(0, extent));
    } catch (const json::exception&) {
        return std::nullopt;
    }
    if (!a.args.is_object()) return std::nullopt;
    if (a.tool == "final_answer") {
        if (!a.args.contains("answer") || !a.args["answer"].is_string()) return std::nullopt;
        a.kind = ActionKind::final_answer;
        a.answer = text::trim(a.args["answer"].get<std::string>());
        a.tool.clear();
        a.args = json::object();
        if (a.answer.empty()) return std::nullopt;
    }
    return a;
}

}  // namespace

ParsedAction parse_action(std::string_view output) {
    std::string thought;
    std::size_t pos = 0;
    while (pos <= output.size()) {
        const auto nl = output.find('\n', pos);
        const auto line_end = nl == std::string_view::npos ? output.size() : nl;
        const auto line = ltrim(output.substr(pos, line_end - pos));
        std::optional<ParsedAction> parsed;
        if (line.starts_with("Thought:")) {
            thought = text::trim(line.substr(8));
        } else if (line.starts_with("Action:")) {
            // The JSON object may continue over following lines.
            parsed = try_action(output.substr(static_cast<std::size_t>(line.data() - output.data()) + 7));
        } else if (line.starts_with("Final Answer:")) {
            const auto answer = text::trim(line.substr(13));
            if (!answer.empty()) {
                parsed = ParsedAction{};
                parsed->kind = ActionKind::final_answer;
                parsed->answer = answer;
            }
        }
        if (parsed) {
            parsed->thought = thought;
            return *parsed;
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    throw Error(ErrorCode::unparsable_action, "unparsable action");
}

std::string normalize_answer(std::string_view answer) {
    std::string s = text::collapse_whitespace(text::to_lower(answer));
    s = text::trim(s);
    while (!s.empty() && std::ispunct(static_cast<unsigned char>(s.back()))) s.pop_back();
    s = text::trim(s);
    for (const std::string_view article : {"a ", "an ", "the "}) {
        if (s.starts_with(article)) {
            s = text::trim(std::string_view(s).substr(article.size()));
            break;
        }
    }
    return s;
}

Consensus consensus(const std::vector<std::optional<std::string>>& samples) {
    Consensus c;
    c.samples = samples;
    std::map<std::string, std::size_t> counts;
    std::vector<std::string> order;  // normalized forms by first appearance
    std::map<std::string, std::string> first_surface;
    for (const auto& s : samples) {
        if (!s) continue;
        const auto key = normalize_answer(*s);
        if (counts[key]++ == 0) {
            order.push_back(key);
            first_surface[key] = *s;
        }
    }
    for (const auto& key : order) {
        if (counts[key] > c.modal_count) {
            c.modal_count = counts[key];
            c.answer = first_surface[key];
        }
    }
    c.confidence = samples.empty() ? 0.0 : static_cast<double>(c.modal_count) / static_cast<double>(samples.size());
    return c;
}

// ---- trace ------------------------------------------------------------------

std::size_t AgentTrace::call_count() const {
    std::size_t n = 0;
    for (const auto& s : steps) n += s.calls.size();
    return n;
}

namespace {

std::string_view kind_name(ActionKind k) {
    switch (k) {
        case ActionKind::tool: return "tool";
        case ActionKind::final_answer: return "final_answer";
        case ActionKind::error: return "error";
    }
    return "error";
}

ActionKind kind_from(const std::string& s) {
    if (s == "tool") return ActionKind::tool;
    if (s == "final_answer") return ActionKind::final_answer;
    if (s == "error") return ActionKind::error;
    throw Error(ErrorCode::schema_error, "unknown step kind " + s);
}

}  // namespace

json trace_to_json(const AgentTrace& trace) {
    json steps = json::array();
    for (const auto& s : trace.steps) {
        json calls = json::array();
        for (const auto& c : s.calls) calls.push_back({{"digest", c.digest}, {"sample_index", c.sample_index}, {"ok", c.ok}});
        json step{{"step_index", s.step_index}, {"phase", s.phase}, {"thought", s.thought}, {"kind", kind_name(s.kind)},
                  {"observation", s.observation}, {"calls", calls}};
        if (s.kind == ActionKind::tool) {
            step["tool"] = s.tool;
            step["args"] = s.args;
        } else if (s.kind == ActionKind::final_answer) {
            step["answer"] = s.answer;
            step["samples"] = s.samples;
        }
        steps.push_back(std::move(step));
    }
    return json{{"version", 1},
                {"question", trace.question},
                {"steps", steps},
                {"answer", trace.answer},
                {"confidence", trace.confidence},
                {"k_samples", trace.k_samples},
                {"fallback_used", trace.fallback_used},
                {"abstained", trace.abstained}};
}

AgentTrace trace_from_json(const json& doc) {
    try {
        AgentTrace t;
        t.question = doc.at("question").get<std::string>();
        t.answer = doc.at("answer").get<std::string>();
        t.confidence = doc.at("confidence").get<double>();
        t.k_samples = doc.at("k_samples").get<std::size_t>();
        t.fallback_used = doc.at("fallback_used").get<bool>();
        t.abstained = doc.at("abstained").get<bool>();
        for (const auto& s : doc.at("steps")) {
            AgentStep step;
            step.step_index = s.at("step_index").get<std::size_t>();
            step.phase = s.at("phase").get<std::string>();
            step.thought = s.at("thought").get<std::string>();
            step.kind = kind_from(s.at("kind").get<std::string>());
            step.observation = s.at("observation").get<std::string>();
            if (step.kind == ActionKind::tool) {
                step.tool = s.at("tool").get<std::string>();
                step.args = s.at("args");
            } else if (step.kind == ActionKind::final_answer) {
                step.answer = s.at("answer").get<std::string>();
                step.samples = s.at("samples").get<std::vector<std::string>>();
            }
            for (const auto& c : s.at("calls")) {
                step.calls.push_back({c.at("digest").get<std::string>(), c.at("sample_index").get<int>(), c.at("ok").get<bool>()});
            }
            t.steps.push_back(std::move(step));
        }
        return t;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::schema_error, std::string("trace: ") + e.what());
    }
}

// ---- loop -------------------------------------------------------------------

namespace {

class Runner {
public:
    Runner(const std::string& question, const AgentContext& ctx, const ToolRegistry& registry, const AgentConfig& cfg,
           const backend::ModelClient& client)
        : ctx_(ctx), registry_(registry), cfg_(cfg), client_(with_log(client)) {
        trace_.question = question;
        trace_.k_samples = cfg.k_samples;
    }

    AgentTrace run() {
        try {
            run_inner();
        } catch (const Error& e) {
            if (e.code() != ErrorCode::budget_exceeded) throw;
            // Whatever ran before the budget ran out is still accounted for.
            if (open_) close_step();
            throw Error(ErrorCode::budget_exceeded, e.what(), {{"trace", trace_to_json(trace_)}});
        }
        return trace_;
    }

private:
    static backend::ModelClient with_log(const backend::ModelClient& client) {
        if (client.call_log()) return client;
        return client.with_session(client.budget(), std::make_shared<backend::CallLog>());
    }

    void run_inner() {
        std::optional<Consensus> first;
        for (std::size_t i = 0; i < cfg_.max_steps && !first; ++i) {
            auto& step = open_step("main");
            std::string output;
            try {
                output = client_.complete(request(prompt(), 0, client_.profile().temperature)).text;
            } catch (const Error& e) {
                if (e.code() == ErrorCode::budget_exceeded) throw;
                step.kind = ActionKind::error;
                step.observation = std::string("ERROR: backend: ") + e.what();
                close_step();
                continue;
            }
            ParsedAction action;
            try {
                action = parse_action(output);
            } catch (const Error&) {
                step.kind = ActionKind::error;
                step.observation = "ERROR: unparsable action";
                close_step();
                continue;
            }
            step.thought = action.thought;
            step.kind = action.kind;
            if (action.kind == ActionKind::final_answer) {
                step.answer = action.answer;
                first = sample_round(step, action.answer);
            } else {
                step.tool = action.tool;
                step.args = action.args;
                step.observation = invoke(action.tool, action.args);
            }
            close_step();
        }

        if (first && first->confidence >= cfg_.confidence_threshold) {
            trace_.answer = first->answer;
            trace_.confidence = first->confidence;
            return;
        }
        fallback(first ? first->answer : std::string());
    }

    void fallback(const std::string& prior_answer) {
        trace_.fallback_used = true;

        auto& r = open_step("fallback");
        r.kind = ActionKind::tool;
        r.tool = "retrieve";
        r.args = json{{"query", trace_.question}};
        try {
            r.observation = retrieve_with(trace_.question, ctx_, cfg_.retrieve_top_n);
        } catch (const Error& e) {
            r.observation = std::string("ERROR: ") + e.what();
        }
        close_step();

        auto& g = open_step("fallback");
        g.kind = ActionKind::tool;
        g.tool = "graph_summary";
        g.observation = ctx_.graph ? graphqa::graph_summary(*ctx_.graph, cfg_.summary_edges) : "ERROR: no scene graph generated";
        close_step();

        auto& f = open_step("fallback");
        f.kind = ActionKind::final_answer;
        const auto second = sample_round(f, std::nullopt);
        const std::string best = second.answer.empty() ? prior_answer : second.answer;
        f.answer = best;
        close_step();

        trace_.confidence = second.confidence;
        if (second.confidence >= cfg_.confidence_threshold) {
            trace_.answer = second.answer;
        } else {
            trace_.abstained = true;
            trace_.answer = "uncertain: " + best;
        }
    }

    /// k samples of the current prompt; sample 0 is `first` when the loop
    /// already holds it.
    Consensus sample_round(AgentStep& step, const std::optional<std::string>& first) {
        const auto text = prompt();
        std::vector<std::optional<std::string>> samples;
        for (std::size_t j = 0; j < cfg_.k_samples; ++j) {
            if (j == 0 && first) {
                samples.push_back(first);
                continue;
            }
            const double temperature = j == 0 ? client_.profile().temperature : cfg_.sample_temperature;
            try {
                const auto out = client_.complete(request(text, static_cast<int>(j), temperature)).text;
                const auto action = parse_action(out);
                samples.push_back(action.kind == ActionKind::final_answer ? std::optional(action.answer) : std::nullopt);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::budget_exceeded) throw;
                samples.push_back(std::nullopt);
            }
        }
        for (const auto& s : samples) step.samples.push_back(s.value_or(""));
        return consensus(samples);
    }

    std::string invoke(const std::string& name, const json& args) {
        const auto* tool = registry_.find(name);
        if (!tool) return "ERROR: unknown tool " + name;
        for (const auto& field : tool->args) {
            if (!args.contains(field.name)) {
                if (field.required) return "ERROR: missing argument '" + field.name + "'";
                continue;
            }
            const auto& v = args[field.name];
            const bool ok = field.type == "integer" ? v.is_number_integer() : v.is_string();
            if (!ok) return "ERROR: argument '" + field.name + "' must be " + field.type;
        }
        try {
            return tool->handler(args, ctx_, client_);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::budget_exceeded) throw;
            return std::string("ERROR: ") + e.what();
        } catch (const std::exception& e) {
            return std::string("ERROR: ") + e.what();
        }
    }

    std::string prompt() const {
        std::string context =
            ctx_.buffer ? media::buffer_context(*ctx_.buffer, ctx_.transcript, ctx_.context_chars) : std::string();
        if (context.empty()) context = "(no observations yet)";
        std::string steps;
        for (const auto& s : trace_.steps) {
            if (!s.thought.empty()) steps += "Thought: " + s.thought + "\n";
            if (s.kind == ActionKind::tool) {
                steps += "Action: " + s.tool + " " + s.args.dump() + "\n";
            } else if (s.kind == ActionKind::final_answer) {
                steps += "Final Answer: " + s.answer + "\n";
                continue;
            }
            steps += "Observation: " + s.observation + "\n";
        }
        if (steps.empty()) steps = "(none)\n";
        return text::render_template(assets::k_agent_v1_txt, {{"tools", registry_.render()},
                                                               {"context", context},
                                                               {"question", trace_.question},
                                                               {"steps", steps}});
    }

    static backend::ChatRequest request(const std::string& prompt, int sample_index, double temperature) {
        backend::ChatRequest req;
        req.messages.push_back(backend::ChatMessage::text(backend::Role::user, prompt));
        req.sample_index = sample_index;
        req.temperature = temperature;
        return req;
    }

    AgentStep& open_step(const char* phase) {
        mark_ = client_.call_log()->size();
        AgentStep step;
        step.step_index = trace_.steps.size();
        step.phase = phase;
        pending_ = std::move(step);
        open_ = true;
        return pending_;
    }

    void close_step() {
        for (const auto& c : client_.call_log()->since(mark_)) pending_.calls.push_back({c.digest, c.sample_index, c.ok});
        trace_.steps.push_back(std::move(pending_));
        open_ = false;
    }

    const AgentContext& ctx_;
    const ToolRegistry& registry_;
    const AgentConfig& cfg_;
    backend::ModelClient client_;
    AgentTrace trace_;
    AgentStep pending_;
    bool open_ = false;
    std::size_t mark_ = 0;
};

}  // namespace

AgentTrace run_agent(const std::string& question, const AgentContext& ctx, const ToolRegistry& registry,
                     const AgentConfig& cfg, const backend::ModelClient& client) {
    cfg.validate();
    if (!registry.find("final_answer")) {
        throw Error(ErrorCode::invalid_argument, "registry needs a final_answer tool");
    }
    return Runner(question, ctx, registry, cfg, client).run();
}

}  // namespace sceneagent::agent
