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

#include "sceneagent/media/sampler.hpp"

#include <cmath>

#include "sceneagent/error.hpp"
#include "sceneagent/kernels/motion.hpp"

namespace sceneagent::media {

SamplerConfig SamplerConfig::defaults_for(double fps) {
    SamplerConfig cfg;
    cfg.max_gap = static_cast<std::size_t>(std::max(1L, std::lround(2.0 * fps)));
    return cfg;
}

void SamplerConfig::validate() const {
    if (!(motion_threshold >= 0.0 && motion_threshold <= scene_threshold && scene_threshold <= 1.0)) {
        throw Error(ErrorCode::invalid_argument, "sampler thresholds must satisfy 0 <= tau <= tau_scene <= 1");
    }
    if (max_gap < 1) throw Error(ErrorCode::invalid_argument, "max_gap must be >= 1");
    if (downscale_edge < 1) throw Error(ErrorCode::invalid_argument, "downscale_edge must be >= 1");
}

double motion_score(const LuminanceFrame& prev, const LuminanceFrame& curr, const SamplerConfig& cfg) {
    return kernels::motion_score(prev, curr, cfg.downscale_edge);
}

std::vector<Keyframe> select_from_scores(std::span<const double> scores, double fps, const SamplerConfig& cfg) {
    cfg.validate();
    std::vector<Keyframe> keyframes;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const double score = i == 0 ? 0.0 : scores[i];
        const bool motion = i > 0 && score > cfg.motion_threshold;
        if (i == 0 || motion || i % cfg.max_gap == 0) {
            keyframes.push_back(Keyframe{i, static_cast<double>(i) / fps, score, i > 0 && score > cfg.scene_threshold});
        }
    }
    return keyframes;
}

std::vector<Keyframe> select_keyframes(std::span<const LuminanceFrame> frames, double fps, const SamplerConfig& cfg) {
    cfg.validate();
    const auto scores = kernels::consecutive_motion_scores(frames, cfg.downscale_edge);
    return select_from_scores(scores, fps, cfg);
}

std::vector<Keyframe> select_keyframes(const MediaManifest& manifest, const SamplerConfig& cfg) {
    const auto frames = load_frames(manifest);
    return select_keyframes(frames, manifest.fps, cfg);
}

}  // namespace sceneagent::media
