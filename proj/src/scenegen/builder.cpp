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

#include "sceneagent/scenegen/builder.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include "sceneagent/error.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::scenegen {

GraphBuilder::GraphBuilder(std::string video_id, double fps, const Vocabulary& vocabulary,
                           std::shared_ptr<const RelationScorer> scorer)
    : vocabulary_(&vocabulary), scorer_(std::move(scorer)) {
    graph_.video_id = std::move(video_id);
    graph_.fps = fps;
    graph_.vocabulary_version = vocabulary.version();
}

std::string GraphBuilder::node_for(const DetectedEntity& entity, std::size_t ordinal, std::size_t frame) {
    const std::string& category = entity.category.empty() ? std::string(kUnknownCategory) : entity.category;
    const std::string id =
        entity.track_hint ? category + "@" + *entity.track_hint : category + "#" + std::to_string(ordinal);
    auto [it, inserted] = graph_.nodes.try_emplace(id);
    SceneNode& node = it->second;
    if (inserted) {
        node.id = id;
        node.category = category;
        node.first_frame = frame;
        node.last_frame = frame;
        node.attrs["kind"] = std::string(to_string(vocabulary_->kind_of(category)));
        node.attrs["label"] = entity.raw_label;
    }
    node.first_frame = std::min(node.first_frame, frame);
    node.last_frame = std::max(node.last_frame, frame);
    node.provenance.push_back({frame, entity.bbox});
    return id;
}

void GraphBuilder::add_relation(const std::string& src, const std::string& dst, SpatialRelation relation,
                                double confidence, std::size_t frame) {
    if (src == dst) return;
    const auto key = std::make_tuple(src, dst, std::string(to_string(relation)));
    if (auto it = latest_edge_.find(key); it != latest_edge_.end()) {
        SceneEdge& edge = graph_.edges.at(it->second);
        const bool alive = edge.t_end == frame || (last_keyframe_ && edge.t_end >= *last_keyframe_);
        if (alive) {
            if (edge.t_end != frame) {
                edge.t_end = frame;
                edge.provenance.push_back(frame);
            }
            edge.confidence = std::max(edge.confidence, confidence);
            return;
        }
    }
    char buf[16];
    std::snprintf(buf, sizeof buf, "e%06zu", next_edge_++);
    SceneEdge edge{buf, src, dst, std::get<2>(key), frame, frame, confidence, {frame}};
    latest_edge_[key] = edge.id;
    graph_.edges.emplace(edge.id, std::move(edge));
}

void GraphBuilder::merge(const ObservedFrame& observed) {
    const auto& obs = observed.observation;
    const std::size_t frame = obs.keyframe_index;
    if (last_keyframe_ && frame <= *last_keyframe_) {
        throw Error(ErrorCode::unknown_frame_order, "keyframe " + std::to_string(frame) +
                                                        " merged after keyframe " + std::to_string(*last_keyframe_));
    }

    std::vector<std::string> ids;
    std::map<std::string, std::size_t> ordinals;
    std::vector<EntityView> views;
    for (const auto& entity : obs.entities) {
        std::size_t ordinal = 0;
        if (!entity.track_hint) ordinal = ordinals[entity.category]++;
        ids.push_back(node_for(entity, ordinal, frame));
        views.push_back({entity.bbox, vocabulary_->kind_of(entity.category)});
    }

    // Relations are applied in (src, dst, relation) order so that edge ids do
    // not depend on the order entities were listed in.
    std::map<std::tuple<std::string, std::string, SpatialRelation>, double> found;
    auto note = [&](std::size_t s, std::size_t d, SpatialRelation r, double conf) {
        auto [it, fresh] = found.try_emplace({ids[s], ids[d], r}, conf);
        if (!fresh) it->second = std::max(it->second, conf);
    };
    if (observed.dims.width > 0 && observed.dims.height > 0 && scorer_) {
        for (const auto& hit : scorer_->score(views, observed.dims)) note(hit.src, hit.dst, hit.relation, hit.confidence);
    }

    auto resolve = [&](const std::string& label) -> std::optional<std::size_t> {
        const auto wanted = normalize_label(label);
        for (std::size_t i = 0; i < obs.entities.size(); ++i) {
            const auto& e = obs.entities[i];
            if (normalize_label(e.raw_label) == wanted || normalize_label(e.category) == wanted) return i;
        }
        return std::nullopt;
    };
    for (const auto& triple : obs.relations) {
        std::string rel = text::to_lower(text::trim(triple.relation));
        std::replace(rel.begin(), rel.end(), ' ', '_');
        const auto relation = relation_from_string(rel);
        const auto s = resolve(triple.src_label);
        const auto d = resolve(triple.dst_label);
        if (!relation || !s || !d || *s == *d) continue;
        note(*s, *d, *relation, std::min(obs.entities[*s].confidence, obs.entities[*d].confidence));
    }
    for (const auto& [key, conf] : found) {
        add_relation(std::get<0>(key), std::get<1>(key), std::get<2>(key), conf, frame);
    }
    last_keyframe_ = frame;
}

void GraphBuilder::merge(std::span<const ObservedFrame> frames) {
    for (const auto& f : frames) merge(f);
}

SceneGraph merge_into_graph(GraphBuilder& builder, std::span<const ObservedFrame> frames) {
    builder.merge(frames);
    return builder.graph();
}

}  // namespace sceneagent::scenegen
