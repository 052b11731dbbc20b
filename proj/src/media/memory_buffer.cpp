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

#include "sceneagent/media/memory_buffer.hpp"

#include <algorithm>

#include "sceneagent/error.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::media {

std::string entity_key(const scenegen::DetectedEntity& entity) {
    if (!entity.category.empty()) return entity.category;
    return text::collapse_whitespace(text::to_lower(entity.raw_label));
}

MemoryBuffer::MemoryBuffer(std::size_t window) : window_(window) {
    if (window_ == 0) throw Error(ErrorCode::invalid_argument, "memory buffer window must be >= 1");
}

void MemoryBuffer::push(Observation obs) {
    if (!entries_.empty() && obs.keyframe_index <= entries_.back().keyframe_index) {
        throw Error(ErrorCode::out_of_order_observation,
                    "observation for keyframe " + std::to_string(obs.keyframe_index) +
                        " does not follow keyframe " + std::to_string(entries_.back().keyframe_index));
    }
    entries_.push_back(std::move(obs));
    while (entries_.size() > window_) entries_.pop_front();
    recompute();
}

void MemoryBuffer::clear() {
    entries_.clear();
    merged_.clear();
}

void MemoryBuffer::recompute() {
    merged_.clear();
    for (const auto& obs : entries_) {
        for (const auto& e : obs.entities) {
            const auto key = entity_key(e);
            auto [it, inserted] = merged_.try_emplace(key, FrameInterval{obs.keyframe_index, obs.keyframe_index});
            if (!inserted) {
                it->second.first = std::min(it->second.first, obs.keyframe_index);
                it->second.last = std::max(it->second.last, obs.keyframe_index);
            }
        }
    }
}

std::string buffer_context(const MemoryBuffer& buffer, const Transcript* transcript, std::size_t budget_chars) {
    if (budget_chars < 64) throw Error(ErrorCode::invalid_argument, "context budget must be >= 64 chars");

    std::vector<std::string> lines;
    for (const auto& obs : buffer.entries()) {
        std::vector<std::string> keys;
        for (const auto& e : obs.entities) keys.push_back(entity_key(e));
        std::sort(keys.begin(), keys.end());
        keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

        std::string line = "[t=" + text::fixed1(obs.timestamp_s) + "s] ";
        if (obs.scene_boundary) line += "(scene change) ";
        line += obs.caption + " | entities: ";
        for (std::size_t i = 0; i < keys.size(); ++i) {
            const auto& iv = buffer.merged_entities().at(keys[i]);
            if (i) line += ", ";
            line += keys[i] + "[" + std::to_string(iv.first) + "," + std::to_string(iv.last) + "]";
        }
        lines.push_back(std::move(line));
    }

    if (transcript && !buffer.empty()) {
        const double t0 = buffer.entries().front().timestamp_s;
        const double t1 = buffer.entries().back().timestamp_s;
        for (const auto& u : transcript->utterances) {
            if (u.t_end_s >= t0 && u.t_start_s <= t1) lines.push_back(render_utterance(u));
        }
    }

    // Drop the oldest lines until the joined text fits.
    std::size_t total = 0;
    for (const auto& l : lines) total += l.size();
    total += lines.empty() ? 0 : lines.size() - 1;
    std::size_t first = 0;
    while (first < lines.size() && total > budget_chars) {
        total -= lines[first].size() + (first + 1 < lines.size() ? 1 : 0);
        ++first;
    }

    std::string out;
    for (std::size_t i = first; i < lines.size(); ++i) {
        if (i > first) out.push_back('\n');
        out += lines[i];
    }
    return out;
}

}  // namespace sceneagent::media
