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

#include "sceneagent/graphqa/execute.hpp"

#include <algorithm>
#include <set>

#include "sceneagent/scenegen/relations.hpp"
#include "sceneagent/scenegen/vocabulary.hpp"

namespace sceneagent::graphqa {

using scenegen::SceneEdge;
using scenegen::SceneGraph;
using scenegen::SceneNode;

namespace {

bool label_matches(const SceneNode& node, const std::string& label) {
    if (node.category == label) return true;
    auto it = node.attrs.find("kind");
    return it != node.attrs.end() && it->second == label;
}

bool label_known(const SceneGraph& graph, const std::string& label) {
    if (scenegen::kind_from_string(label)) return true;
    return std::any_of(graph.nodes.begin(), graph.nodes.end(),
                       [&](const auto& kv) { return kv.second.category == label; });
}

template <typename T>
bool compare(const T& lhs, CompareOp op, const T& rhs) {
    switch (op) {
        case CompareOp::eq: return lhs == rhs;
        case CompareOp::ne: return lhs != rhs;
        case CompareOp::lt: return lhs < rhs;
        case CompareOp::le: return lhs <= rhs;
        case CompareOp::gt: return lhs > rhs;
        case CompareOp::ge: return lhs >= rhs;
    }
    return false;
}

bool holds(const Condition& c, const QueryAst& ast, const SceneEdge& edge, const SceneGraph& graph) {
    if (c.var == ast.edge.var) {
        switch (c.field) {
            case Field::relation: return compare(edge.relation, c.op, c.literal.text);
            case Field::t_start: return compare(static_cast<double>(edge.t_start), c.op, c.literal.number);
            case Field::t_end: return compare(static_cast<double>(edge.t_end), c.op, c.literal.number);
            case Field::confidence: return compare(edge.confidence, c.op, c.literal.number);
            case Field::category: return false;
        }
    }
    const SceneNode* node = graph.node(c.var == ast.src.var ? edge.src : edge.dst);
    if (!node) return false;
    switch (c.field) {
        case Field::category: return compare(node->category, c.op, c.literal.text);
        case Field::t_start: return compare(static_cast<double>(node->first_frame), c.op, c.literal.number);
        case Field::t_end: return compare(static_cast<double>(node->last_frame), c.op, c.literal.number);
        default: return false;
    }
}

std::string describe(const Condition& c) {
    return c.var + "." + std::string(to_string(c.field)) + " " + std::string(to_string(c.op)) + " " +
           (c.literal.is_string ? "'" + c.literal.text + "'" : c.literal.text);
}

}  // namespace

ResultSet execute(const QueryAst& ast, const SceneGraph& graph) {
    check_query(ast);
    ResultSet result;
    auto& trace = result.trace;

    std::vector<const SceneEdge*> survivors;
    for (const auto& [id, edge] : graph.edges) survivors.push_back(&edge);
    trace.candidate_count = survivors.size();

    auto narrow = [&](const std::string& description, auto&& keep) {
        std::erase_if(survivors, [&](const SceneEdge* e) { return !keep(*e); });
        trace.filter_steps.push_back({description, survivors.size()});
    };

    if (ast.src.label) {
        if (!label_known(graph, *ast.src.label)) trace.notes.push_back("unknown category '" + *ast.src.label + "'");
        narrow(ast.src.var + ":" + *ast.src.label, [&](const SceneEdge& e) {
            const auto* n = graph.node(e.src);
            return n && label_matches(*n, *ast.src.label);
        });
    }
    if (ast.edge.relation) {
        if (!scenegen::relation_from_string(*ast.edge.relation)) {
            trace.notes.push_back("unknown relation '" + *ast.edge.relation + "'");
        }
        narrow(ast.edge.var + ":" + *ast.edge.relation,
               [&](const SceneEdge& e) { return e.relation == *ast.edge.relation; });
    }
    if (ast.dst.label) {
        if (!label_known(graph, *ast.dst.label)) trace.notes.push_back("unknown category '" + *ast.dst.label + "'");
        narrow(ast.dst.var + ":" + *ast.dst.label, [&](const SceneEdge& e) {
            const auto* n = graph.node(e.dst);
            return n && label_matches(*n, *ast.dst.label);
        });
    }
    for (const auto& c : ast.where) {
        narrow(describe(c), [&](const SceneEdge& e) { return holds(c, ast, e, graph); });
    }

    if (ast.form == QueryForm::count || ast.form == QueryForm::exists) {
        trace.order_key = "edge_id asc";
        for (const auto* e : survivors) trace.chosen_ids.push_back(e->id);
        if (ast.form == QueryForm::count) {
            result.value = survivors.size();
        } else {
            result.value = !survivors.empty();
        }
        return result;
    }

    std::size_t keep = survivors.size();
    switch (ast.order) {
        case Order::latest:
            trace.order_key = "t_end desc, edge_id asc";
            std::stable_sort(survivors.begin(), survivors.end(), [](const SceneEdge* a, const SceneEdge* b) {
                if (a->t_end != b->t_end) return a->t_end > b->t_end;
                return a->id < b->id;
            });
            keep = ast.limit.value_or(1);
            break;
        case Order::earliest:
            trace.order_key = "t_start asc, edge_id asc";
            std::stable_sort(survivors.begin(), survivors.end(), [](const SceneEdge* a, const SceneEdge* b) {
                if (a->t_start != b->t_start) return a->t_start < b->t_start;
                return a->id < b->id;
            });
            keep = ast.limit.value_or(1);
            break;
        case Order::none:
            trace.order_key = "edge_id asc";
            if (ast.limit) keep = *ast.limit;
            break;
    }
    survivors.resize(std::min(keep, survivors.size()));

    const std::string& sel = *ast.selector;
    for (const auto* e : survivors) {
        const std::string& id = sel == ast.edge.var ? e->id : (sel == ast.src.var ? e->src : e->dst);
        result.rows.push_back({{sel, id}});
        trace.chosen_ids.push_back(e->id);
    }
    return result;
}

nlohmann::json result_to_json(const ResultSet& r) {
    using nlohmann::json;
    json steps = json::array();
    for (const auto& s : r.trace.filter_steps) steps.push_back({{"condition", s.condition}, {"surviving", s.surviving}});
    return json{{"rows", r.rows},
                {"value", r.value ? *r.value : json(nullptr)},
                {"trace",
                 {{"candidate_count", r.trace.candidate_count},
                  {"filter_steps", steps},
                  {"order_key", r.trace.order_key},
                  {"chosen_ids", r.trace.chosen_ids},
                  {"notes", r.trace.notes}}}};
}

std::optional<std::string> latest_contact(const SceneGraph& graph, const std::string& tool_category,
                                          const std::string& target_category) {
    const auto ast =
        parse_query("MATCH (a:" + tool_category + ")-[r:contacts]->(b:" + target_category + ") RETURN a LATEST");
    auto result = execute(ast, graph);
    if (result.rows.empty()) return std::nullopt;
    return result.rows.front().at("a");
}

std::string graph_summary(const SceneGraph& graph, std::size_t n) {
    std::vector<const SceneEdge*> edges;
    for (const auto& [id, e] : graph.edges) edges.push_back(&e);
    std::stable_sort(edges.begin(), edges.end(), [](const SceneEdge* a, const SceneEdge* b) {
        if (a->t_end != b->t_end) return a->t_end > b->t_end;
        return a->id < b->id;
    });
    std::string out = "nodes:" + std::to_string(graph.nodes.size()) + " edges:" + std::to_string(graph.edges.size());
    for (std::size_t i = 0; i < edges.size() && i < n; ++i) {
        const auto* e = edges[i];
        out += "\n" + e->src + " -" + e->relation + "-> " + e->dst + " [" + std::to_string(e->t_start) + "," +
               std::to_string(e->t_end) + "]";
    }
    return out;
}

}  // namespace sceneagent::graphqa
