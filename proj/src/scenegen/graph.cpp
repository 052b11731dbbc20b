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

#include "sceneagent/scenegen/graph.hpp"

#include <algorithm>
#include <limits>

#include "sceneagent/error.hpp"
#include "sceneagent/scenegen/relations.hpp"

namespace sceneagent::scenegen {

using nlohmann::json;

const SceneNode* SceneGraph::node(std::string_view id) const {
    auto it = nodes.find(std::string(id));
    return it == nodes.end() ? nullptr : &it->second;
}

void SceneGraph::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::invalid_argument, "scene graph: " + msg); };
    std::size_t lo = std::numeric_limits<std::size_t>::max();
    std::size_t hi = 0;
    for (const auto& [id, n] : nodes) {
        if (id != n.id) fail("node key mismatch for " + n.id);
        if (n.first_frame > n.last_frame) fail("node " + id + " has first_frame > last_frame");
        if (n.provenance.empty()) fail("node " + id + " has no provenance");
        lo = std::min(lo, n.first_frame);
        hi = std::max(hi, n.last_frame);
    }
    for (const auto& [id, e] : edges) {
        if (id != e.id) fail("edge key mismatch for " + e.id);
        if (!nodes.contains(e.src) || !nodes.contains(e.dst)) fail("edge " + id + " has a dangling endpoint");
        if (e.src == e.dst) fail("edge " + id + " is a self loop");
        if (e.t_start > e.t_end) fail("edge " + id + " has t_start > t_end");
        if (!relation_from_string(e.relation)) fail("edge " + id + " relation '" + e.relation + "' not in vocabulary");
        if (e.t_start < lo || e.t_end > hi) fail("edge " + id + " interval outside node span");
    }
}

std::string_view to_string(TemporalRelation r) {
    switch (r) {
        case TemporalRelation::before: return "before";
        case TemporalRelation::after: return "after";
        case TemporalRelation::during: return "during";
        case TemporalRelation::overlaps: return "overlaps";
    }
    return "overlaps";
}

TemporalRelation temporal_relation(const SceneEdge& e1, const SceneEdge& e2) {
    if (e1.t_end < e2.t_start) return TemporalRelation::before;
    if (e2.t_end < e1.t_start) return TemporalRelation::after;
    if (e2.t_start <= e1.t_start && e1.t_end <= e2.t_end) return TemporalRelation::during;
    return TemporalRelation::overlaps;
}

json graph_to_json(const SceneGraph& g) {
    json nodes = json::array();
    for (const auto& [id, n] : g.nodes) {
        json prov = json::array();
        for (const auto& s : n.provenance) prov.push_back(json::array({s.frame, {s.bbox.x, s.bbox.y, s.bbox.w, s.bbox.h}}));
        nodes.push_back({{"id", n.id},
                         {"category", n.category},
                         {"first_frame", n.first_frame},
                         {"last_frame", n.last_frame},
                         {"attrs", n.attrs},
                         {"provenance", std::move(prov)}});
    }
    json edges = json::array();
    for (const auto& [id, e] : g.edges) {
        edges.push_back({{"id", e.id},
                         {"src", e.src},
                         {"dst", e.dst},
                         {"relation", e.relation},
                         {"t_start", e.t_start},
                         {"t_end", e.t_end},
                         {"confidence", e.confidence},
                         {"provenance", e.provenance}});
    }
    return json{{"version", kGraphSchemaVersion},
                {"video_id", g.video_id},
                {"fps", g.fps},
                {"vocabulary_version", g.vocabulary_version},
                {"nodes", std::move(nodes)},
                {"edges", std::move(edges)}};
}

SceneGraph graph_from_json(const json& doc) {
    SceneGraph g;
    try {
        if (doc.at("version").get<int>() != kGraphSchemaVersion) {
            throw Error(ErrorCode::invalid_argument, "unsupported scene graph version");
        }
        g.video_id = doc.at("video_id").get<std::string>();
        g.fps = doc.at("fps").get<double>();
        g.vocabulary_version = doc.at("vocabulary_version").get<std::string>();
        for (const auto& jn : doc.at("nodes")) {
            SceneNode n;
            n.id = jn.at("id").get<std::string>();
            n.category = jn.at("category").get<std::string>();
            n.first_frame = jn.at("first_frame").get<std::size_t>();
            n.last_frame = jn.at("last_frame").get<std::size_t>();
            n.attrs = jn.at("attrs").get<std::map<std::string, std::string>>();
            for (const auto& p : jn.at("provenance")) {
                const auto& b = p.at(1);
                n.provenance.push_back(
                    {p.at(0).get<std::size_t>(),
                     BBox{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()}});
            }
            if (!g.nodes.emplace(n.id, n).second) throw Error(ErrorCode::invalid_argument, "duplicate node id " + n.id);
        }
        for (const auto& je : doc.at("edges")) {
            SceneEdge e;
            e.id = je.at("id").get<std::string>();
            e.src = je.at("src").get<std::string>();
            e.dst = je.at("dst").get<std::string>();
            e.relation = je.at("relation").get<std::string>();
            e.t_start = je.at("t_start").get<std::size_t>();
            e.t_end = je.at("t_end").get<std::size_t>();
            e.confidence = je.at("confidence").get<double>();
            e.provenance = je.at("provenance").get<std::vector<std::size_t>>();
            if (!g.edges.emplace(e.id, e).second) throw Error(ErrorCode::invalid_argument, "duplicate edge id " + e.id);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("scene graph schema: ") + e.what());
    }
    g.validate();
    return g;
}

std::string export_graph(const SceneGraph& graph) { return graph_to_json(graph).dump(); }

SceneGraph import_graph(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("scene graph is not JSON: ") + e.what());
    }
    return graph_from_json(doc);
}

}  // namespace sceneagent::scenegen
