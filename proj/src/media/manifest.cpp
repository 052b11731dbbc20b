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

#include "sceneagent/media/manifest.hpp"

#include <fstream>

#include "sceneagent/error.hpp"

namespace sceneagent::media {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

MediaManifest parse_manifest(const json& doc, const fs::path& base_dir) {
    if (!doc.is_object()) throw Error(ErrorCode::bad_manifest, "manifest must be a JSON object");
    MediaManifest m;
    try {
        m.video_id = doc.at("video_id").get<std::string>();
        m.fps = doc.at("fps").get<double>();
        for (const auto& f : doc.at("frames")) m.frame_paths.push_back(resolve(base_dir, f.get<std::string>()));
        if (auto it = doc.find("transcript"); it != doc.end() && !it->is_null()) {
            m.transcript_path = resolve(base_dir, it->get<std::string>());
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::bad_manifest, std::string("manifest schema: ") + e.what());
    }
    if (!(m.fps > 0.0)) throw Error(ErrorCode::bad_manifest, "manifest fps must be > 0");
    if (m.frame_paths.empty()) throw Error(ErrorCode::bad_manifest, "manifest lists no frames");
    for (std::size_t i = 0; i < m.frame_paths.size(); ++i) {
        if (!fs::exists(m.frame_paths[i])) {
            throw Error(ErrorCode::missing_frame_file, "frame file not found: " + m.frame_paths[i].string(),
                        m.frame_paths[i].string());
        }
        read_pgm(m.frame_paths[i], i);
    }
    if (m.transcript_path && !fs::exists(*m.transcript_path)) {
        throw Error(ErrorCode::bad_manifest, "transcript not found: " + m.transcript_path->string());
    }
    return m;
}

MediaManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::bad_manifest, "manifest not found: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::bad_manifest, path.string() + ": " + e.what());
    }
    return parse_manifest(doc, path.parent_path());
}

json manifest_to_json(const MediaManifest& m) {
    json frames = json::array();
    for (const auto& p : m.frame_paths) frames.push_back(p.string());
    return json{{"video_id", m.video_id},
                {"fps", m.fps},
                {"frames", frames},
                {"transcript", m.transcript_path ? json(m.transcript_path->string()) : json(nullptr)}};
}

LuminanceFrame load_frame(const MediaManifest& m, std::size_t index) {
    return read_pgm(m.frame_paths.at(index), index);
}

std::vector<LuminanceFrame> load_frames(const MediaManifest& m) {
    std::vector<LuminanceFrame> frames;
    frames.reserve(m.frame_count());
    for (std::size_t i = 0; i < m.frame_count(); ++i) frames.push_back(load_frame(m, i));
    return frames;
}

}  // namespace sceneagent::media
