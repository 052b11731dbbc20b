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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sceneagent/graphqa/query.hpp"
#include "sceneagent/scenegen/graph.hpp"

namespace sceneagent::graphqa {

struct FilterStep {
    std::string condition;
    std::size_t surviving = 0;

    bool operator==(const FilterStep&) const = default;
};

struct ExecutionTrace {
    std::size_t candidate_count = 0;
    std::vector<FilterStep> filter_steps;
    std::string order_key;
    std::vector<std::string> chosen_ids;  // edge ids behind the result
    std::vector<std::string> notes;

    bool operator==(const ExecutionTrace&) const = default;
};

using Binding = std::map<std::string, std::string>;

struct ResultSet {
    std::vector<Binding> rows;            // MATCH: selector var -> node or edge id
    std::optional<nlohmann::json> value;  // COUNT: integer, EXISTS: boolean
    ExecutionTrace trace;

    bool operator==(const ResultSet&) const = default;
};

/// Runs a query over a graph snapshot. Candidates are all edges in id order;
/// pattern constraints then WHERE conditions narrow them one step at a time.
/// LATEST orders by (t_end desc, edge id asc) and EARLIEST by (t_start asc,
/// edge id asc), each keeping LIMIT rows (1 when absent).
///
/// A node label matches the node's category id or its kind attribute. Labels
/// or relations the graph does not know simply match nothing; a note is
/// recorded in the trace.
ResultSet execute(const QueryAst& ast, const scenegen::SceneGraph& graph);

nlohmann::json result_to_json(const ResultSet& result);

/// Source node of the edge answering
/// "MATCH (a:<tool>)-[r:contacts]->(b:<target>) RETURN a LATEST".
std::optional<std::string> latest_contact(const scenegen::SceneGraph& graph, const std::string& tool_category,
                                          const std::string& target_category);

/// "nodes:N edges:M" followed by the n edges with greatest t_end (ties by id)
/// as "src -rel-> dst [t_start,t_end]", one per line.
std::string graph_summary(const scenegen::SceneGraph& graph, std::size_t n);

}  // namespace sceneagent::graphqa
