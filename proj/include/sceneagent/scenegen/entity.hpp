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

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace sceneagent::scenegen {

/// Axis-aligned box in source-frame pixels (x, y is the top-left corner).
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    double right() const { return x + w; }
    double bottom() const { return y + h; }

    bool operator==(const BBox&) const = default;
};

struct DetectedEntity {
    std::string raw_label;
    BBox bbox;
    std::optional<std::string> track_hint;
    double confidence = 1.0;
    std::size_t frame_index = 0;
    std::string category;  // canonical id once canonicalized, empty before

    bool operator==(const DetectedEntity&) const = default;
};

/// Relation as reported by the vision model, labels not yet resolved.
struct RelationTriple {
    std::string src_label;
    std::string relation;
    std::string dst_label;

    bool operator==(const RelationTriple&) const = default;
};

}  // namespace sceneagent::scenegen
