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

#include "sceneagent/media/transcript.hpp"

#include <algorithm>
#include <fstream>

#include "sceneagent/error.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::media {

using nlohmann::json;

Transcript parse_transcript(const json& doc) {
    Transcript t;
    try {
        for (const auto& u : doc.at("utterances")) {
            Utterance utt;
            utt.t_start_s = u.at("t_start_s").get<double>();
            utt.t_end_s = u.at("t_end_s").get<double>();
            if (auto it = u.find("speaker"); it != u.end() && !it->is_null()) utt.speaker = it->get<std::string>();
            utt.text = u.at("text").get<std::string>();
            if (utt.t_start_s > utt.t_end_s) {
                throw Error(ErrorCode::invalid_argument, "utterance ends before it starts: " + utt.text);
            }
            t.utterances.push_back(std::move(utt));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("transcript schema: ") + e.what());
    }
    std::stable_sort(t.utterances.begin(), t.utterances.end(),
                     [](const Utterance& a, const Utterance& b) { return a.t_start_s < b.t_start_s; });
    return t;
}

Transcript load_transcript(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "transcript not found: " + path.string());
    try {
        return parse_transcript(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
    }
}

json transcript_to_json(const Transcript& transcript) {
    json utterances = json::array();
    for (const auto& u : transcript.utterances) {
        utterances.push_back({{"t_start_s", u.t_start_s},
                              {"t_end_s", u.t_end_s},
                              {"speaker", u.speaker ? json(*u.speaker) : json(nullptr)},
                              {"text", u.text}});
    }
    return json{{"utterances", utterances}};
}

std::vector<Utterance> transcript_search(const Transcript& transcript, std::string_view needle) {
    const std::string lowered = text::to_lower(needle);
    std::vector<Utterance> hits;
    for (const auto& u : transcript.utterances) {
        if (text::to_lower(u.text).find(lowered) != std::string::npos) hits.push_back(u);
    }
    return hits;
}

std::string render_utterance(const Utterance& u) {
    std::string line = "[speech " + text::fixed1(u.t_start_s) + "–" + text::fixed1(u.t_end_s) + "] ";
    if (u.speaker) line += *u.speaker + ": ";
    return line + u.text;
}

}  // namespace sceneagent::media
