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
#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace sceneagent::media {

/// A decoded 8-bit grayscale frame, row-major.
struct LuminanceFrame {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;
    std::size_t index = 0;

    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

/// Parses a binary portable graymap ("P5", maxval <= 255). Throws
/// Error{malformed_frame} on bad magic, bad header, maxval > 255 or short data.
LuminanceFrame parse_pgm(std::string_view bytes, std::size_t index = 0);

/// Reads and parses a P5 file. Throws Error{missing_frame_file} if absent.
LuminanceFrame read_pgm(const std::filesystem::path& path, std::size_t index = 0);

void write_pgm(const std::filesystem::path& path, const LuminanceFrame& frame);

/// Uniform frame, handy for fixtures.
LuminanceFrame solid_frame(std::size_t width, std::size_t height, std::uint8_t value,
                           std::size_t index = 0);

}  // namespace sceneagent::media
