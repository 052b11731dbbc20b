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

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <tuple>

#include "sceneagent/media/memory_buffer.hpp"
#include "sceneagent/scenegen/graph.hpp"
#include "sceneagent/scenegen/relations.hpp"
#include "sceneagent/scenegen/vocabulary.hpp"

namespace sceneagent::scenegen {

/// Frame geometry the observation was made on; zero disables geometric
/// relation inference (model-reported relations are still merged).
struct ObservedFrame {
    media::Observation observation;
    FrameDims dims;
};

/// Accumulates keyframe observations into a SceneGraph.
///
/// Node identity is (category, track hint) when a hint is given, otherwise
/// (category, ordinal of the entity among hint-less entities of that category
/// in its keyframe). A relation seen at a keyframe extends the latest edge with
/// the same (src, dst, relation) when that edge was still alive at the
/// previous merged keyframe; otherwise a new edge starts, so a relation that
/// lapses and recurs yields disjoint intervals.
class GraphBuilder {
public:
    GraphBuilder(std::string video_id, double fps, const Vocabulary& vocabulary,
                 std::shared_ptr<const RelationScorer> scorer = std::make_shared<GeometricScorer>());

    /// Entities must already carry canonical categories. Throws
    /// Error{unknown_frame_order} unless the keyframe index is strictly
    /// greater than every previously merged one.
    void merge(const ObservedFrame& frame);
    void merge(std::span<const ObservedFrame> frames);

    const SceneGraph& graph() const { return graph_; }
    std::optional<std::size_t> last_keyframe() const { return last_keyframe_; }

private:
    std::string node_for(const DetectedEntity& entity, std::size_t ordinal, std::size_t frame);
    void add_relation(const std::string& src, const std::string& dst, SpatialRelation relation, double confidence,
                      std::size_t frame);

    SceneGraph graph_;
    const Vocabulary* vocabulary_;
    std::shared_ptr<const RelationScorer> scorer_;
    std::optional<std::size_t> last_keyframe_;
    std::map<std::tuple<std::string, std::string, std::string>, std::string> latest_edge_;
    std::size_t next_edge_ = 1;
};

/// Functional form: merges the frames into the builder's graph and returns it.
SceneGraph merge_into_graph(GraphBuilder& builder, std::span<const ObservedFrame> frames);

}  // namespace sceneagent::scenegen
