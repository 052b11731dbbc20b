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

#include "sceneagent/kernels/motion.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace sceneagent::kernels {

namespace {

struct Tap {
    std::size_t src;
    double weight;
};

// For each output cell along one axis: the source cells it overlaps and the
// overlap length, in source units.
std::vector<std::vector<Tap>> box_taps(std::size_t src_len, std::size_t out_len) {
    std::vector<std::vector<Tap>> taps(out_len);
    const double step = static_cast<double>(src_len) / static_cast<double>(out_len);
    for (std::size_t o = 0; o < out_len; ++o) {
        const double lo = step * static_cast<double>(o);
        const double hi = step * static_cast<double>(o + 1);
        const auto first = static_cast<std::size_t>(std::floor(lo));
        const auto last = std::min(src_len, static_cast<std::size_t>(std::ceil(hi)));
        for (std::size_t s = first; s < last; ++s) {
            const double w = std::min(hi, static_cast<double>(s + 1)) - std::max(lo, static_cast<double>(s));
            if (w > 0.0) taps[o].push_back({s, w});
        }
    }
    return taps;
}

}  // namespace

std::pair<std::size_t, std::size_t> target_dims(std::size_t width, std::size_t height, std::size_t edge) {
    const std::size_t longer = std::max(width, height);
    if (longer <= edge) return {width, height};
    const double scale = static_cast<double>(edge) / static_cast<double>(longer);
    auto shrink = [&](std::size_t v) {
        return std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(static_cast<double>(v) * scale)), 1, edge);
    };
    return {width >= height ? edge : shrink(width), height >= width ? edge : shrink(height)};
}

std::pair<std::size_t, std::size_t> common_dims(const media::LuminanceFrame& a, const media::LuminanceFrame& b,
                                                std::size_t edge) {
    const auto [aw, ah] = target_dims(a.width, a.height, edge);
    const auto [bw, bh] = target_dims(b.width, b.height, edge);
    return {std::min(aw, bw), std::min(ah, bh)};
}

Grid area_downscale(const media::LuminanceFrame& frame, std::size_t out_w, std::size_t out_h) {
    const auto xtaps = box_taps(frame.width, out_w);
    const auto ytaps = box_taps(frame.height, out_h);

    // Horizontal pass into frame.height x out_w, then vertical.
    std::vector<double> rows(frame.height * out_w, 0.0);
    for (std::size_t y = 0; y < frame.height; ++y) {
        const std::uint8_t* src = frame.pixels.data() + y * frame.width;
        for (std::size_t ox = 0; ox < out_w; ++ox) {
            double acc = 0.0;
            for (const auto& t : xtaps[ox]) acc += t.weight * src[t.src];
            rows[y * out_w + ox] = acc;
        }
    }
    const double cell_area = (static_cast<double>(frame.width) / static_cast<double>(out_w)) *
                             (static_cast<double>(frame.height) / static_cast<double>(out_h));
    Grid grid{out_w, out_h, std::vector<double>(out_w * out_h, 0.0)};
    for (std::size_t oy = 0; oy < out_h; ++oy) {
        for (std::size_t ox = 0; ox < out_w; ++ox) {
            double acc = 0.0;
            for (const auto& t : ytaps[oy]) acc += t.weight * rows[t.src * out_w + ox];
            grid.values[oy * out_w + ox] = acc / cell_area;
        }
    }
    return grid;
}

double mean_abs_diff(const Grid& a, const Grid& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += std::abs(a.values[i] - b.values[i]);
    return acc / (255.0 * static_cast<double>(a.values.size()));
}

double motion_score(const media::LuminanceFrame& a, const media::LuminanceFrame& b, std::size_t edge) {
    const auto [w, h] = common_dims(a, b, edge);
    return std::clamp(mean_abs_diff(area_downscale(a, w, h), area_downscale(b, w, h)), 0.0, 1.0);
}

std::vector<double> consecutive_motion_scores(std::span<const media::LuminanceFrame> frames, std::size_t edge) {
    const auto n = static_cast<std::ptrdiff_t>(frames.size());
    std::vector<double> scores(frames.size(), 0.0);
    if (n < 2) return scores;

    std::vector<Grid> own(frames.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& f = frames[static_cast<std::size_t>(i)];
        const auto [w, h] = target_dims(f.width, f.height, edge);
        own[static_cast<std::size_t>(i)] = area_downscale(f, w, h);
    }

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 1; i < n; ++i) {
        const auto& ga = own[static_cast<std::size_t>(i - 1)];
        const auto& gb = own[static_cast<std::size_t>(i)];
        double s = 0.0;
        if (ga.width == gb.width && ga.height == gb.height) {
            s = mean_abs_diff(ga, gb);
        } else {
            s = motion_score(frames[static_cast<std::size_t>(i - 1)], frames[static_cast<std::size_t>(i)], edge);
        }
        scores[static_cast<std::size_t>(i)] = std::clamp(s, 0.0, 1.0);
    }
    return scores;
}

namespace reference {

Grid area_downscale(const media::LuminanceFrame& frame, std::size_t out_w, std::size_t out_h) {
    const double sx = static_cast<double>(frame.width) / static_cast<double>(out_w);
    const double sy = static_cast<double>(frame.height) / static_cast<double>(out_h);
    Grid grid{out_w, out_h, std::vector<double>(out_w * out_h, 0.0)};
    for (std::size_t oy = 0; oy < out_h; ++oy) {
        for (std::size_t ox = 0; ox < out_w; ++ox) {
            const double x0 = sx * static_cast<double>(ox);
            const double x1 = sx * static_cast<double>(ox + 1);
            const double y0 = sy * static_cast<double>(oy);
            const double y1 = sy * static_cast<double>(oy + 1);
            double acc = 0.0;
            double area = 0.0;
            for (std::size_t y = 0; y < frame.height; ++y) {
                const double oyl = std::min(y1, static_cast<double>(y + 1)) - std::max(y0, static_cast<double>(y));
                if (oyl <= 0.0) continue;
                for (std::size_t x = 0; x < frame.width; ++x) {
                    const double oxl =
                        std::min(x1, static_cast<double>(x + 1)) - std::max(x0, static_cast<double>(x));
                    if (oxl <= 0.0) continue;
                    acc += oxl * oyl * frame.at(x, y);
                    area += oxl * oyl;
                }
            }
            grid.values[oy * out_w + ox] = acc / area;
        }
    }
    return grid;
}

double motion_score(const media::LuminanceFrame& a, const media::LuminanceFrame& b, std::size_t edge) {
    const auto [w, h] = common_dims(a, b, edge);
    const Grid ga = area_downscale(a, w, h);
    const Grid gb = area_downscale(b, w, h);
    double acc = 0.0;
    for (std::size_t i = 0; i < ga.values.size(); ++i) acc += std::abs(ga.values[i] - gb.values[i]);
    return acc / static_cast<double>(ga.values.size()) / 255.0;
}

std::vector<double> consecutive_motion_scores(std::span<const media::LuminanceFrame> frames, std::size_t edge) {
    std::vector<double> scores(frames.size(), 0.0);
    for (std::size_t i = 1; i < frames.size(); ++i) scores[i] = motion_score(frames[i - 1], frames[i], edge);
    return scores;
}

}  // namespace reference

}  // namespace sceneagent::kernels
