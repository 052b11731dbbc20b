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

#include "sceneagent/scenegen/relations.hpp"

#include <algorithm>
#include <cmath>

namespace sceneagent::scenegen {

namespace {
constexpr SpatialRelation kAll[] = {SpatialRelation::above,   SpatialRelation::below,    SpatialRelation::left_of,
                                    SpatialRelation::right_of, SpatialRelation::next_to, SpatialRelation::inside,
                                    SpatialRelation::contacts, SpatialRelation::holds};
}

std::string_view to_string(SpatialRelation r) {
    switch (r) {
        case SpatialRelation::above: return "above";
        case SpatialRelation::below: return "below";
        case SpatialRelation::left_of: return "left_of";
        case SpatialRelation::right_of: return "right_of";
        case SpatialRelation::next_to: return "next_to";
        case SpatialRelation::inside: return "inside";
        case SpatialRelation::contacts: return "contacts";
        case SpatialRelation::holds: return "holds";
    }
    return "next_to";
}

std::optional<SpatialRelation> relation_from_string(std::string_view s) {
    for (auto r : kAll) {
        if (to_string(r) == s) return r;
    }
    return std::nullopt;
}

const std::vector<std::string>& spatial_vocabulary() {
    static const std::vector<std::string> vocab = [] {
        std::vector<std::string> v;
        for (auto r : kAll) v.emplace_back(to_string(r));
        return v;
    }();
    return vocab;
}

double box_gap(const BBox& a, const BBox& b) {
    const double dx = std::max({0.0, a.x - b.right(), b.x - a.right()});
    const double dy = std::max({0.0, a.y - b.bottom(), b.y - a.bottom()});
    return std::hypot(dx, dy);
}

double intersection_area(const BBox& a, const BBox& b) {
    const double w = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double h = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

std::vector<RelationHit> GeometricScorer::score(std::span<const EntityView> entities, FrameDims dims) const {
    std::vector<RelationHit> hits;
    const double dx = margin_ * dims.width;
    const double dy = margin_ * dims.height;
    for (std::size_t i = 0; i < entities.size(); ++i) {
        for (std::size_t j = 0; j < entities.size(); ++j) {
            if (i == j) continue;
            const auto& a = entities[i].bbox;
            const auto& b = entities[j].bbox;
            auto emit = [&](SpatialRelation r) { hits.push_back({i, j, r, 1.0}); };

            if (a.cx() + dx < b.cx()) emit(SpatialRelation::left_of);
            if (b.cx() + dx < a.cx()) emit(SpatialRelation::right_of);
            // Image y grows downward.
            if (a.cy() + dy < b.cy()) emit(SpatialRelation::above);
            if (b.cy() + dy < a.cy()) emit(SpatialRelation::below);

            const bool inside = a.x > b.x && a.y > b.y && a.right() < b.right() && a.bottom() < b.bottom();
            if (inside) emit(SpatialRelation::inside);

            const double gap = box_gap(a, b);
            const bool contacts = intersection_area(a, b) > 0.0 || gap <= contact_tol_;
            if (contacts) emit(SpatialRelation::contacts);
            if (!contacts && !inside && gap <= dx) emit(SpatialRelation::next_to);
            if (contacts && entities[i].kind == EntityKind::person && entities[j].kind == EntityKind::instrument) {
                emit(SpatialRelation::holds);
            }
        }
    }
    return hits;
}

std::vector<RelationHit> infer_spatial_relations(std::span<const EntityView> entities, FrameDims dims,
                                                 const RelationScorer& scorer) {
    return scorer.score(entities, dims);
}

}  // namespace sceneagent::scenegen
