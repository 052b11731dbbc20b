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

#include <cstddef>
#include <span>
#include <vector>

#include "sceneagent/media/frame.hpp"
#include "sceneagent/media/manifest.hpp"

namespace sceneagent::media {

struct SamplerConfig {
    double motion_threshold = 0.08;  // tau
    double scene_threshold = 0.35;   // tau_scene, >= tau
    std::size_t max_gap = 2;
    std::size_t downscale_edge = 32;

    /// tau=0.08, tau_scene=0.35, max_gap=round(2*fps) (at least 1).
    static SamplerConfig defaults_for(double fps);
    void validate() const;
};

struct Keyframe {
    std::size_t frame_index = 0;
    double timestamp_s = 0.0;
    double motion_score = 0.0;
    bool scene_boundary = false;

    bool operator==(const Keyframe&) const = default;
};

/// Mean absolute luminance difference / 255 over a common area-averaged grid
/// whose longer edge is at most cfg.downscale_edge. Symmetric, in [0, 1].
double motion_score(const LuminanceFrame& prev, const LuminanceFrame& curr,
                    const SamplerConfig& cfg);

/// Keyframe decision from precomputed consecutive-frame scores
/// (scores[i] = motion_score(frame i-1, frame i); scores[0] is ignored).
///
/// Frame 0 is always selected. Frame i > 0 is selected when its score exceeds
/// tau or when i is a multiple of max_gap. The cadence keyframes bound every
/// gap by max_gap, and because neither rule depends on earlier selections,
/// lowering tau can only add keyframes.
std::vector<Keyframe> select_from_scores(std::span<const double> scores, double fps,
                                         const SamplerConfig& cfg);

std::vector<Keyframe> select_keyframes(std::span<const LuminanceFrame> frames, double fps,
                                       const SamplerConfig& cfg);

std::vector<Keyframe> select_keyframes(const MediaManifest& manifest, const SamplerConfig& cfg);

}  // namespace sceneagent::media
