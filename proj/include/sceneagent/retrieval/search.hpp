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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sceneagent/retrieval/index.hpp"

namespace sceneagent::retrieval {

enum class Channel { vector, graph, both };
std::string_view to_string(Channel c);

struct Hit {
    std::string chunk_id;
    double score = 0.0;
    std::vector<std::string> matched_entities;
    Channel channel = Channel::vector;
    double vector_score = 0.0;
    double graph_score = 0.0;

    bool operator==(const Hit&) const = default;
};

struct FusionConfig {
    double alpha = 0.6;  // vector weight
    double beta = 0.4;   // graph weight
    std::size_t top_k_vector = 5;
    std::size_t top_n = 3;

    void validate() const;
};

/// Graph channel: chunks of a query entity score 1.0; chunks reached through
/// a co-occurring entity (and not already direct) score 0.5.
std::vector<Hit> low_level_retrieve(const KGIndex& kg, std::span<const std::string> query_entities);

/// Vector channel: cosine of the hashed query embedding against every chunk,
/// top k by (score desc, chunk id asc). Non-positive scores are dropped.
std::vector<Hit> high_level_retrieve(const VectorIndex& vi, std::string_view query_text, std::size_t k);

/// fused = alpha * vector + beta * graph, sorted by (fused desc, chunk id asc),
/// truncated to top_n.
std::vector<Hit> fuse(std::span<const Hit> low, std::span<const Hit> high, const FusionConfig& cfg);

/// Both channels for a free-text query; query entities come from the same
/// vocabulary matcher used at ingest.
std::vector<Hit> retrieve(const RetrievalIndex& index, std::string_view query, const scenegen::Vocabulary& vocabulary,
                          const FusionConfig& cfg = {});

/// One line per hit: "<chunk_id> (<doc_id>, score 0.600, both) <text>".
std::string render_hits(std::span<const Hit> hits, const RetrievalIndex& index);

nlohmann::json hits_to_json(std::span<const Hit> hits, const RetrievalIndex& index);

}  // namespace sceneagent::retrieval
