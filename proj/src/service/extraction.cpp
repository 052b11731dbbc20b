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

#include "sceneagent/service/extraction.hpp"

#include "assets.hpp"
#include "sceneagent/error.hpp"
#include "sceneagent/media/frame.hpp"
#include "sceneagent/scenegen/relations.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::service {

using nlohmann::json;

std::optional<media::Observation> parse_extraction(std::string_view reply, const media::Keyframe& keyframe,
                                                   const scenegen::FrameDims& dims) {
    json doc;
    try {
        doc = json::parse(text::trim(reply));
    } catch (const json::exception&) {
        return std::nullopt;
    }
    if (!doc.is_object() || !doc.contains("caption") || !doc["caption"].is_string() || !doc.contains("entities") ||
        !doc["entities"].is_array()) {
        return std::nullopt;
    }
    media::Observation obs;
    obs.keyframe_index = keyframe.frame_index;
    obs.timestamp_s = keyframe.timestamp_s;
    obs.scene_boundary = keyframe.scene_boundary;
    obs.caption = doc["caption"].get<std::string>();
    for (const auto& e : doc["entities"]) {
        if (!e.is_object() || !e.contains("label") || !e["label"].is_string() || !e.contains("bbox")) return std::nullopt;
        const auto& b = e["bbox"];
        if (!b.is_array() || b.size() != 4) return std::nullopt;
        for (const auto& v : b) {
            if (!v.is_number()) return std::nullopt;
        }
        scenegen::DetectedEntity ent;
        ent.raw_label = e["label"].get<std::string>();
        ent.bbox = {b[0].get<double>(), b[1].get<double>(), b[2].get<double>(), b[3].get<double>()};
        if (ent.bbox.w <= 0 || ent.bbox.h <= 0 || ent.bbox.x < 0 || ent.bbox.y < 0 || ent.bbox.right() > dims.width ||
            ent.bbox.bottom() > dims.height) {
            return std::nullopt;
        }
        if (e.contains("track_hint") && !e["track_hint"].is_null()) {
            if (!e["track_hint"].is_string()) return std::nullopt;
            ent.track_hint = e["track_hint"].get<std::string>();
        }
        ent.confidence = e.value("confidence", 1.0);
        if (ent.confidence < 0.0 || ent.confidence > 1.0) return std::nullopt;
        ent.frame_index = keyframe.frame_index;
        obs.entities.push_back(std::move(ent));
    }
    if (doc.contains("relations") && !doc["relations"].is_null()) {
        if (!doc["relations"].is_array()) return std::nullopt;
        for (const auto& r : doc["relations"]) {
            if (!r.is_array() || r.size() != 3 || !r[0].is_string() || !r[1].is_string() || !r[2].is_string()) {
                return std::nullopt;
            }
            obs.relations.push_back({r[0].get<std::string>(), r[1].get<std::string>(), r[2].get<std::string>()});
        }
    }
    return obs;
}

backend::ChatRequest extraction_request(const media::MediaManifest& manifest, const media::Keyframe& keyframe,
                                        const scenegen::FrameDims& dims, bool strict) {
    std::string relations;
    for (const auto& r : scenegen::spatial_vocabulary()) relations += (relations.empty() ? "" : ", ") + r;
    const auto prompt = text::render_template(strict ? assets::k_extract_strict_v1_txt : assets::k_extract_v1_txt,
                                              {{"frame_index", std::to_string(keyframe.frame_index)},
                                               {"timestamp", text::fixed1(keyframe.timestamp_s)},
                                               {"width", std::to_string(static_cast<long>(dims.width))},
                                               {"height", std::to_string(static_cast<long>(dims.height))},
                                               {"relations", relations}});
    backend::ChatMessage msg;
    msg.role = backend::Role::user;
    msg.parts.push_back(backend::TextPart{prompt});
    msg.parts.push_back(backend::ImageRef{manifest.frame_paths.at(keyframe.frame_index), keyframe.frame_index});
    backend::ChatRequest req;
    req.messages.push_back(std::move(msg));
    req.max_tokens = 1024;
    return req;
}

SceneGenResult generate_scene_graph(const media::MediaManifest& manifest, std::span<const media::Keyframe> keyframes,
                                    const scenegen::Vocabulary& vocabulary, const backend::ModelClient& client,
                                    const backend::ModelClient* canonicalizer) {
    auto session = client.call_log() ? client : client.with_session(client.budget(), std::make_shared<backend::CallLog>());
    SceneGenResult result;
    scenegen::GraphBuilder builder(manifest.video_id, manifest.fps, vocabulary);
    for (const auto& kf : keyframes) {
        const auto frame = media::load_frame(manifest, kf.frame_index);
        const scenegen::FrameDims dims{static_cast<double>(frame.width), static_cast<double>(frame.height)};
        KeyframeExtraction ex;
        ex.frame_index = kf.frame_index;
        const auto mark = session.call_log()->size();
        for (const bool strict : {false, true}) {
            const auto reply = session.complete(extraction_request(manifest, kf, dims, strict));
            ex.observation = parse_extraction(reply.text, kf, dims);
            if (ex.observation) break;
        }
        ex.calls = session.call_log()->since(mark);
        if (ex.observation) {
            for (auto& e : ex.observation->entities) e.category = scenegen::canonicalize(e.raw_label, vocabulary, canonicalizer);
            builder.merge(scenegen::ObservedFrame{*ex.observation, dims});
            result.observations.push_back(*ex.observation);
        } else {
            result.warnings.push_back("keyframe " + std::to_string(kf.frame_index) +
                                      ": extraction reply did not match the contract");
        }
        result.keyframes.push_back(std::move(ex));
    }
    result.graph = builder.graph();
    return result;
}

json observation_to_json(const media::Observation& obs) {
    json entities = json::array();
    for (const auto& e : obs.entities) {
        entities.push_back({{"raw_label", e.raw_label},
                            {"category", e.category},
                            {"bbox", {e.bbox.x, e.bbox.y, e.bbox.w, e.bbox.h}},
                            {"track_hint", e.track_hint ? json(*e.track_hint) : json(nullptr)},
                            {"confidence", e.confidence},
                            {"frame_index", e.frame_index}});
    }
    json relations = json::array();
    for (const auto& r : obs.relations) relations.push_back({r.src_label, r.relation, r.dst_label});
    return json{{"keyframe_index", obs.keyframe_index},
                {"timestamp_s", obs.timestamp_s},
                {"caption", obs.caption},
                {"entities", entities},
                {"relations", relations},
                {"scene_boundary", obs.scene_boundary}};
}

media::Observation observation_from_json(const json& doc) {
    media::Observation obs;
    obs.keyframe_index = doc.at("keyframe_index").get<std::size_t>();
    obs.timestamp_s = doc.at("timestamp_s").get<double>();
    obs.caption = doc.at("caption").get<std::string>();
    obs.scene_boundary = doc.at("scene_boundary").get<bool>();
    for (const auto& e : doc.at("entities")) {
        scenegen::DetectedEntity ent;
        ent.raw_label = e.at("raw_label").get<std::string>();
        ent.category = e.at("category").get<std::string>();
        const auto& b = e.at("bbox");
        ent.bbox = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(), b.at(3).get<double>()};
        if (!e.at("track_hint").is_null()) ent.track_hint = e["track_hint"].get<std::string>();
        ent.confidence = e.at("confidence").get<double>();
        ent.frame_index = e.at("frame_index").get<std::size_t>();
        obs.entities.push_back(std::move(ent));
    }
    for (const auto& r : doc.at("relations")) {
        obs.relations.push_back({r.at(0).get<std::string>(), r.at(1).get<std::string>(), r.at(2).get<std::string>()});
    }
    return obs;
}

json keyframe_to_json(const media::Keyframe& kf) {
    return json{{"frame_index", kf.frame_index},
                {"timestamp_s", kf.timestamp_s},
                {"motion_score", kf.motion_score},
                {"scene_boundary", kf.scene_boundary}};
}

media::Keyframe keyframe_from_json(const json& doc) {
    return media::Keyframe{doc.at("frame_index").get<std::size_t>(), doc.at("timestamp_s").get<double>(),
                           doc.at("motion_score").get<double>(), doc.at("scene_boundary").get<bool>()};
}

}  // namespace sceneagent::service
