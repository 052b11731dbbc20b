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

#include "sceneagent/media/frame.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "sceneagent/error.hpp"

namespace sceneagent::media {

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            const char c = bytes_[pos_];
            if (c == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    std::size_t read_uint(const char* what) {
        skip_space_and_comments();
        std::size_t value = 0;
        std::size_t digits = 0;
        while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
            value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
            if (value > (1u << 24)) throw Error(ErrorCode::malformed_frame, std::string("PGM ") + what + " too large");
            ++pos_;
            ++digits;
        }
        if (digits == 0) throw Error(ErrorCode::malformed_frame, std::string("PGM header: expected ") + what);
        return value;
    }

    std::size_t pos() const { return pos_; }
    void advance() { ++pos_; }
    bool at_space() const {
        return pos_ < bytes_.size() && std::isspace(static_cast<unsigned char>(bytes_[pos_]));
    }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

LuminanceFrame parse_pgm(std::string_view bytes, std::size_t index) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
        throw Error(ErrorCode::malformed_frame, "not a binary graymap (expected magic P5)");
    }
    HeaderReader reader(bytes.substr(2));
    const std::size_t width = reader.read_uint("width");
    const std::size_t height = reader.read_uint("height");
    const std::size_t maxval = reader.read_uint("maxval");
    if (width == 0 || height == 0) throw Error(ErrorCode::malformed_frame, "PGM dimensions must be >= 1");
    if (maxval == 0 || maxval > 255) {
        throw Error(ErrorCode::malformed_frame,
                    "PGM maxval " + std::to_string(maxval) + " is not 8-bit (1..255)");
    }
    if (!reader.at_space()) throw Error(ErrorCode::malformed_frame, "PGM header not terminated by whitespace");
    reader.advance();

    const std::size_t offset = 2 + reader.pos();
    const std::size_t count = width * height;
    if (bytes.size() - offset < count) {
        throw Error(ErrorCode::malformed_frame, "PGM pixel data truncated: expected " + std::to_string(count) +
                                                    " bytes, found " + std::to_string(bytes.size() - offset));
    }
    LuminanceFrame frame;
    frame.width = width;
    frame.height = height;
    frame.index = index;
    frame.pixels.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        frame.pixels[i] = static_cast<std::uint8_t>(bytes[offset + i]);
    }
    return frame;
}

LuminanceFrame read_pgm(const std::filesystem::path& path, std::size_t index) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::missing_frame_file, "frame file not found: " + path.string(), path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return parse_pgm(bytes, index);
    } catch (const Error& e) {
        throw Error(e.code(), path.string() + ": " + e.what(), path.string());
    }
}

void write_pgm(const std::filesystem::path& path, const LuminanceFrame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << "P5\n" << frame.width << ' ' << frame.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(frame.pixels.data()),
              static_cast<std::streamsize>(frame.pixels.size()));
}

LuminanceFrame solid_frame(std::size_t width, std::size_t height, std::uint8_t value, std::size_t index) {
    return LuminanceFrame{width, height, std::vector<std::uint8_t>(width * height, value), index};
}

}  // namespace sceneagent::media
