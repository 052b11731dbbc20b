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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sceneagent/scenegen/entity.hpp"
#include "sceneagent/scenegen/vocabulary.hpp"

namespace sceneagent::scenegen {

enum class SpatialRelation { above, below, left_of, right_of, next_to, inside, contacts, holds };

std::string_view to_string(SpatialRelation r);
std::optional<SpatialRelation> relation_from_string(std::string_view s);
const std::vector<std::string>& spatial_vocabulary();

struct FrameDims {
    double width = 0.0;
    double height = 0.0;
};

struct EntityView {
    BBox bbox;
    EntityKind kind = EntityKind::other;
};

/// An ordered-pair relation between entities of one frame (indices into the
/// scored span).
struct RelationHit {
    std::size_t src = 0;
    std::size_t dst = 0;
    SpatialRelation relation = SpatialRelation::next_to;
    double confidence = 1.0;

    bool operator==(const RelationHit&) const = default;
};

/// Pluggable spatial relation classifier.
class RelationScorer {
public:
    virtual ~RelationScorer() = default;
    virtual std::vector<RelationHit> score(std::span<const EntityView> entities, FrameDims dims) const = 0;
};

/// Rule-based scorer over box geometry. Margin is a fraction of the frame
/// dimension along the axis being compared; contacts tolerates a 1 px gap.
class GeometricScorer final : public RelationScorer {
public:
    explicit GeometricScorer(double margin_fraction = 0.05, double contact_tolerance_px = 1.0)
        : margin_(margin_fraction), contact_tol_(contact_tolerance_px) {}

    std::vector<RelationHit> score(std::span<const EntityView> entities, FrameDims dims) const override;

private:
    double margin_;
    double contact_tol_;
};

/// Euclidean distance between two boxes; 0 when they touch or overlap.
double box_gap(const BBox& a, const BBox& b);
double intersection_area(const BBox& a, const BBox& b);

std::vector<RelationHit> infer_spatial_relations(std::span<const EntityView> entities, FrameDims dims,
                                                 const RelationScorer& scorer = GeometricScorer());

}  // namespace sceneagent::scenegen
