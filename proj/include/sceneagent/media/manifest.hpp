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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sceneagent/media/frame.hpp"

namespace sceneagent::media {

/// A video as an ordered list of grayscale frame files plus timing.
struct MediaManifest {
    std::string video_id;
    double fps = 1.0;
    std::vector<std::filesystem::path> frame_paths;
    std::optional<std::filesystem::path> transcript_path;

    std::size_t frame_count() const { return frame_paths.size(); }
    double duration_s() const { return static_cast<double>(frame_paths.size()) / fps; }
};

/// Loads {"video_id","fps","frames":[...],"transcript":path|null}. Relative
/// paths resolve against the manifest's directory. Every frame is parsed once
/// to validate it; frames may differ in size.
MediaManifest load_manifest(const std::filesystem::path& path);

/// Same as load_manifest but from an already parsed document.
MediaManifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir);

nlohmann::json manifest_to_json(const MediaManifest& manifest);

LuminanceFrame load_frame(const MediaManifest& manifest, std::size_t index);
std::vector<LuminanceFrame> load_frames(const MediaManifest& manifest);

}  // namespace sceneagent::media
