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
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sceneagent/scenegen/entity.hpp"

namespace sceneagent::scenegen {

struct NodeSighting {
    std::size_t frame = 0;
    BBox bbox;

    bool operator==(const NodeSighting&) const = default;
};

struct SceneNode {
    std::string id;
    std::string category;
    std::size_t first_frame = 0;
    std::size_t last_frame = 0;
    std::map<std::string, std::string> attrs;
    std::vector<NodeSighting> provenance;

    bool operator==(const SceneNode&) const = default;
};

struct SceneEdge {
    std::string id;
    std::string src;
    std::string dst;
    std::string relation;
    std::size_t t_start = 0;
    std::size_t t_end = 0;
    double confidence = 1.0;
    std::vector<std::size_t> provenance;

    bool operator==(const SceneEdge&) const = default;
};

/// Canonical objects as nodes, spatial relations as edges labelled with the
/// frame interval over which they held. Keyed by id so iteration is sorted.
struct SceneGraph {
    std::string video_id;
    double fps = 1.0;
    std::string vocabulary_version;
    std::map<std::string, SceneNode> nodes;
    std::map<std::string, SceneEdge> edges;

    const SceneNode* node(std::string_view id) const;
    /// Throws Error{invalid_argument} naming the first broken invariant.
    void validate() const;

    bool operator==(const SceneGraph&) const = default;
};

enum class TemporalRelation { before, after, during, overlaps };

std::string_view to_string(TemporalRelation r);

/// before: e1 ends before e2 starts; after: the converse; during: e1's interval
/// lies within e2's (equality included); otherwise overlaps.
TemporalRelation temporal_relation(const SceneEdge& e1, const SceneEdge& e2);

inline constexpr int kGraphSchemaVersion = 1;

nlohmann::json graph_to_json(const SceneGraph& graph);
SceneGraph graph_from_json(const nlohmann::json& doc);

/// Canonical document: sorted keys, nodes and edges sorted by id, compact.
std::string export_graph(const SceneGraph& graph);
SceneGraph import_graph(std::string_view document);

}  // namespace sceneagent::scenegen
