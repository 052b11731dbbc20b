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
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sceneagent::media {

struct Utterance {
    double t_start_s = 0.0;
    double t_end_s = 0.0;
    std::optional<std::string> speaker;
    std::string text;

    bool operator==(const Utterance&) const = default;
};

struct Transcript {
    std::vector<Utterance> utterances;  // sorted by t_start_s
};

Transcript parse_transcript(const nlohmann::json& doc);
Transcript load_transcript(const std::filesystem::path& path);
nlohmann::json transcript_to_json(const Transcript& transcript);

/// Case-insensitive substring match over utterance text, in time order.
std::vector<Utterance> transcript_search(const Transcript& transcript, std::string_view needle);

/// "[speech 1.0–2.5] text" with an optional "speaker: " prefix on the text.
std::string render_utterance(const Utterance& u);

}  // namespace sceneagent::media
