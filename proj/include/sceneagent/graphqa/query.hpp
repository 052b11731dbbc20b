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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sceneagent::graphqa {

enum class QueryForm { match, count, exists };
enum class Order { none, latest, earliest };
enum class Field { t_start, t_end, category, relation, confidence };
enum class CompareOp { eq, ne, lt, le, gt, ge };

struct Literal {
    bool is_string = false;
    std::string text;     // string contents, or the number as written
    double number = 0.0;  // numeric value when !is_string

    bool operator==(const Literal&) const = default;
};

struct NodeSpec {
    std::string var;
    std::optional<std::string> label;  // category id or entity kind

    bool operator==(const NodeSpec&) const = default;
};

struct EdgeSpec {
    std::string var;
    std::optional<std::string> relation;

    bool operator==(const EdgeSpec&) const = default;
};

struct Condition {
    std::string var;
    Field field = Field::t_end;
    CompareOp op = CompareOp::eq;
    Literal literal;

    bool operator==(const Condition&) const = default;
};

/// One single-edge pattern (src)-[edge]->(dst) with optional filters.
struct QueryAst {
    QueryForm form = QueryForm::match;
    NodeSpec src;
    EdgeSpec edge;
    NodeSpec dst;
    std::vector<Condition> where;
    std::optional<std::string> selector;  // MATCH only
    Order order = Order::none;
    std::optional<std::size_t> limit;

    bool operator==(const QueryAst&) const = default;
};

std::string_view to_string(Field f);
std::string_view to_string(CompareOp op);

/// Grammar:
///   query = "MATCH" pat [wh] "RETURN" var [ord] [lim] | "COUNT" pat [wh] | "EXISTS" pat [wh]
///   pat   = "(" var [":" ident] ")" "-[" var [":" ident] "]->" "(" var [":" ident] ")"
///   wh    = "WHERE" cond {"AND" cond}
///   cond  = var "." field op literal
///   ord   = "LATEST" | "EARLIEST"
///   lim   = "LIMIT" int
/// Keywords are case-insensitive, identifiers match [a-z_][a-z0-9_]*, strings
/// are single-quoted, numbers are unsigned decimals.
///
/// Throws Error{syntax_error} with detail {"offset": 1-based, "expected": [...]}.
/// Semantic checks (bound variables, field/type compatibility) follow parsing:
/// Error{unbound_variable} or Error{invalid_field}.
QueryAst parse_query(std::string_view text);

/// Plan-time validation; parse_query already calls it.
void check_query(const QueryAst& ast);

/// Canonical text form; parse_query(render_query(q)) == q.
std::string render_query(const QueryAst& ast);

}  // namespace sceneagent::graphqa
