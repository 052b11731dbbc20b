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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sceneagent/backend/client.hpp"
#include "sceneagent/media/manifest.hpp"
#include "sceneagent/media/memory_buffer.hpp"
#include "sceneagent/media/sampler.hpp"
#include "sceneagent/scenegen/builder.hpp"
#include "sceneagent/scenegen/graph.hpp"
#include "sceneagent/scenegen/vocabulary.hpp"

namespace sceneagent::service {

/// Parses a vision model reply against the extraction contract
///   {"caption": str, "entities": [{"label", "bbox": [x,y,w,h],
///    "track_hint": str|null, "confidence"}], "relations": [[src, rel, dst]]}
/// Boxes must have positive size and lie within the frame. Entities come back
/// with raw labels only (no category yet). Returns nullopt when the reply does
/// not conform.
std::optional<media::Observation> parse_extraction(std::string_view reply, const media::Keyframe& keyframe,
                                                   const scenegen::FrameDims& dims);

/// The extraction request for one keyframe (prompt plus frame reference).
backend::ChatRequest extraction_request(const media::MediaManifest& manifest, const media::Keyframe& keyframe,
                                        const scenegen::FrameDims& dims, bool strict);

struct KeyframeExtraction {
    std::size_t frame_index = 0;
    std::optional<media::Observation> observation;  // nullopt: listed as a warning
    std::vector<backend::CallRecord> calls;
};

struct SceneGenResult {
    scenegen::SceneGraph graph;
    std::vector<media::Observation> observations;  // keyframes that contributed
    std::vector<std::string> warnings;
    std::vector<KeyframeExtraction> keyframes;
};

/// One extraction call per keyframe (one stricter retry on a non-conforming
/// reply), label canonicalization, then merging in keyframe order. Backend
/// failures propagate.
SceneGenResult generate_scene_graph(const media::MediaManifest& manifest, std::span<const media::Keyframe> keyframes,
                                    const scenegen::Vocabulary& vocabulary, const backend::ModelClient& client,
                                    const backend::ModelClient* canonicalizer = nullptr);

nlohmann::json observation_to_json(const media::Observation& obs);
media::Observation observation_from_json(const nlohmann::json& doc);
nlohmann::json keyframe_to_json(const media::Keyframe& kf);
media::Keyframe keyframe_from_json(const nlohmann::json& doc);

}  // namespace sceneagent::service
