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
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "sceneagent/media/transcript.hpp"
#include "sceneagent/scenegen/entity.hpp"

namespace sceneagent::media {

/// What the vision model reported for one keyframe.
struct Observation {
    std::size_t keyframe_index = 0;  // frame ordinal of the keyframe
    double timestamp_s = 0.0;
    std::string caption;
    std::vector<scenegen::DetectedEntity> entities;
    std::vector<scenegen::RelationTriple> relations;
    bool scene_boundary = false;

    bool operator==(const Observation&) const = default;
};

struct FrameInterval {
    std::size_t first = 0;
    std::size_t last = 0;

    bool operator==(const FrameInterval&) const = default;
};

/// Entity key used for merging: the canonical id when known, else the raw label.
std::string entity_key(const scenegen::DetectedEntity& entity);

/// Sliding window over the most recent keyframe observations.
class MemoryBuffer {
public:
    explicit MemoryBuffer(std::size_t window = 8);

    /// Appends obs, evicting the oldest entry past the window. Throws
    /// Error{out_of_order_observation} unless obs.keyframe_index is strictly
    /// greater than the newest entry's.
    void push(Observation obs);
    void clear();

    std::size_t window() const { return window_; }
    bool empty() const { return entries_.empty(); }
    const std::deque<Observation>& entries() const { return entries_; }

    /// entity key -> [min, max] keyframe index over surviving entries.
    const std::map<std::string, FrameInterval>& merged_entities() const { return merged_; }

private:
    void recompute();

    std::size_t window_;
    std::deque<Observation> entries_;
    std::map<std::string, FrameInterval> merged_;
};

/// Renders the buffer as prompt context, one line per entry, oldest first:
///   [t=12.5s] caption | entities: scalpel[4,9], tray[9,9]
/// followed by "[speech t0–t1] text" lines for utterances overlapping the
/// buffer's time span. Whole lines are dropped from the front until the
/// newline-joined text fits budget_chars (>= 64).
std::string buffer_context(const MemoryBuffer& buffer, const Transcript* transcript,
                           std::size_t budget_chars);

}  // namespace sceneagent::media
