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
#include <utility>
#include <vector>

#include "sceneagent/media/frame.hpp"

namespace sceneagent::kernels {

/// Downscaled luminance, kept in floating point so averaging loses nothing.
struct Grid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> values;
};

/// Dimensions after shrinking so the longer edge is at most `edge`. Frames
/// already within the limit keep their size.
std::pair<std::size_t, std::size_t> target_dims(std::size_t width, std::size_t height, std::size_t edge);

/// Exact area averaging onto an out_w x out_h grid (separable box weights).
Grid area_downscale(const media::LuminanceFrame& frame, std::size_t out_w, std::size_t out_h);

/// Common grid of two frames: componentwise minimum of their target dims.
std::pair<std::size_t, std::size_t> common_dims(const media::LuminanceFrame& a, const media::LuminanceFrame& b,
                                                std::size_t edge);

/// mean |a_i - b_i| / 255. Grids must share dimensions.
double mean_abs_diff(const Grid& a, const Grid& b);

double motion_score(const media::LuminanceFrame& a, const media::LuminanceFrame& b, std::size_t edge);

/// scores[0] = 0, scores[i] = motion_score(frames[i-1], frames[i]).
/// OpenMP-parallel over frames; per-frame grids are computed once and shared
/// by both neighbouring pairs when their target grids agree.
std::vector<double> consecutive_motion_scores(std::span<const media::LuminanceFrame> frames, std::size_t edge);

namespace reference {

// Serial, unoptimised versions kept as test oracles. The downscale integrates
// each output cell directly in 2-D rather than separably.
Grid area_downscale(const media::LuminanceFrame& frame, std::size_t out_w, std::size_t out_h);
double motion_score(const media::LuminanceFrame& a, const media::LuminanceFrame& b, std::size_t edge);
std::vector<double> consecutive_motion_scores(std::span<const media::LuminanceFrame> frames, std::size_t edge);

}  // namespace reference

}  // namespace sceneagent::kernels
