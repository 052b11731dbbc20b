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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace sceneagent::backend {
class ModelClient;
}

namespace sceneagent::scenegen {

enum class EntityKind { instrument, anatomy, person, equipment, other };

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> kind_from_string(std::string_view s);

struct CanonicalCategory {
    std::string id;
    std::vector<std::string> synonyms;
    EntityKind kind = EntityKind::other;
};

inline constexpr std::string_view kUnknownCategory = "unknown_object";

/// Lowercase, trim, collapse whitespace, treat '_' and '-' as spaces.
std::string normalize_label(std::string_view raw);

class Vocabulary {
public:
    static Vocabulary from_json(const nlohmann::json& doc);
    static Vocabulary load(const std::filesystem::path& path);
    /// The clinical vocabulary shipped with the library.
    static const Vocabulary& clinical();

    const std::string& version() const { return version_; }
    const std::vector<CanonicalCategory>& categories() const { return categories_; }
    const CanonicalCategory* find(std::string_view id) const;
    /// Kind of a category id; unknown ids are EntityKind::other.
    EntityKind kind_of(std::string_view id) const;

    /// Table lookup of an already normalized label (ids and synonyms).
    std::optional<std::string> lookup(const std::string& normalized) const;

    /// Every (surface form, id) pair, used for text entity matching.
    std::vector<std::pair<std::string, std::string>> surface_forms() const;

private:
    std::string version_;
    std::vector<CanonicalCategory> categories_;
    std::map<std::string, std::string> table_;
};

/// Three stages: table hit on the normalized label (then with a trailing 's'
/// removed); otherwise, if a canonicalizer is given, ask it to pick one id from
/// the closed list (any other answer is a miss); otherwise "unknown_object".
std::string canonicalize(std::string_view raw_label, const Vocabulary& vocabulary,
                         const backend::ModelClient* canonicalizer = nullptr);

}  // namespace sceneagent::scenegen
