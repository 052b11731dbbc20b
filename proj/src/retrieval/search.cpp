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

#include "sceneagent/retrieval/search.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "sceneagent/backend/embedder.hpp"
#include "sceneagent/error.hpp"
#include "sceneagent/kernels/similarity.hpp"

namespace sceneagent::retrieval {

std::string_view to_string(Channel c) {
    switch (c) {
        case Channel::vector: return "vector";
        case Channel::graph: return "graph";
        case Channel::both: return "both";
    }
    return "vector";
}

void FusionConfig::validate() const {
    if (alpha < 0.0 || beta < 0.0 || alpha + beta <= 0.0) {
        throw Error(ErrorCode::invalid_argument, "fusion weights must be non-negative with a positive sum");
    }
    if (top_k_vector == 0 || top_n == 0) throw Error(ErrorCode::invalid_argument, "top_k_vector and top_n must be >= 1");
}

namespace {

void sort_hits(std::vector<Hit>& hits) {
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
}

}  // namespace

std::vector<Hit> low_level_retrieve(const KGIndex& kg, std::span<const std::string> query_entities) {
    std::map<std::string, std::pair<double, std::set<std::string>>> scored;
    for (const auto& q : query_entities) {
        auto it = kg.entity_chunks.find(q);
        if (it == kg.entity_chunks.end()) continue;
        for (const auto& id : it->second) {
            auto& slot = scored[id];
            slot.first = 1.0;
            slot.second.insert(q);
        }
    }
    for (const auto& q : query_entities) {
        for (const auto& [pair, count] : kg.cooccurrence) {
            if (pair.first != q || count == 0) continue;
            auto it = kg.entity_chunks.find(pair.second);
            if (it == kg.entity_chunks.end()) continue;
            for (const auto& id : it->second) {
                auto& slot = scored[id];
                if (slot.first == 1.0) continue;
                slot.first = 0.5;
                slot.second.insert(pair.second);
            }
        }
    }
    std::vector<Hit> hits;
    for (auto& [id, slot] : scored) {
        Hit h;
        h.chunk_id = id;
        h.score = slot.first;
        h.graph_score = slot.first;
        h.matched_entities.assign(slot.second.begin(), slot.second.end());
        h.channel = Channel::graph;
        hits.push_back(std::move(h));
    }
    sort_hits(hits);
    return hits;
}

std::vector<Hit> high_level_retrieve(const VectorIndex& vi, std::string_view query_text, std::size_t k) {
    if (k == 0) throw Error(ErrorCode::invalid_argument, "k must be >= 1");
    const auto query = backend::HashingEmbedder(vi.dim).embed(query_text);
    const auto scores = kernels::cosine_scores(query, vi.rows, vi.dim);
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] <= 0.0) continue;
        Hit h;
        h.chunk_id = vi.ids[i];
        h.score = scores[i];
        h.vector_score = scores[i];
        h.channel = Channel::vector;
        hits.push_back(std::move(h));
    }
    sort_hits(hits);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::vector<Hit> fuse(std::span<const Hit> low, std::span<const Hit> high, const FusionConfig& cfg) {
    cfg.validate();
    std::map<std::string, Hit> merged;
    for (const auto& h : high) {
        auto& m = merged[h.chunk_id];
        m.chunk_id = h.chunk_id;
        m.vector_score = h.vector_score;
        m.channel = Channel::vector;
    }
    for (const auto& h : low) {
        auto [it, inserted] = merged.try_emplace(h.chunk_id);
        auto& m = it->second;
        m.chunk_id = h.chunk_id;
        m.graph_score = h.graph_score;
        m.matched_entities = h.matched_entities;
        m.channel = inserted ? Channel::graph : Channel::both;
    }
    std::vector<Hit> hits;
    for (auto& [id, h] : merged) {
        h.score = cfg.alpha * h.vector_score + cfg.beta * h.graph_score;
        hits.push_back(std::move(h));
    }
    sort_hits(hits);
    if (hits.size() > cfg.top_n) hits.resize(cfg.top_n);
    return hits;
}

std::vector<Hit> retrieve(const RetrievalIndex& index, std::string_view query, const scenegen::Vocabulary& vocabulary,
                          const FusionConfig& cfg) {
    const auto entities = extract_entities(query, vocabulary);
    const auto low = low_level_retrieve(index.graph, entities);
    const auto high = high_level_retrieve(index.vectors, query, cfg.top_k_vector);
    return fuse(low, high, cfg);
}

std::string render_hits(std::span<const Hit> hits, const RetrievalIndex& index) {
    if (hits.empty()) return "no matching reference passages";
    std::string out;
    for (const auto& h : hits) {
        const auto* chunk = index.chunk(h.chunk_id);
        char score[32];
        std::snprintf(score, sizeof score, "%.3f", h.score);
        if (!out.empty()) out += "\n";
        out += h.chunk_id + " (" + (chunk ? chunk->doc_id : "?") + ", score " + score + ", " +
               std::string(to_string(h.channel)) + ") " + (chunk ? chunk->text : "");
    }
    return out;
}

nlohmann::json hits_to_json(std::span<const Hit> hits, const RetrievalIndex& index) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& h : hits) {
        const auto* chunk = index.chunk(h.chunk_id);
        out.push_back({{"chunk_id", h.chunk_id},
                       {"doc_id", chunk ? chunk->doc_id : ""},
                       {"score", h.score},
                       {"vector_score", h.vector_score},
                       {"graph_score", h.graph_score},
                       {"channel", to_string(h.channel)},
                       {"matched_entities", h.matched_entities},
                       {"text", chunk ? chunk->text : ""}});
    }
    return out;
}

}  // namespace sceneagent::retrieval
