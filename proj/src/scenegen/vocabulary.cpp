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

#include "sceneagent/scenegen/vocabulary.hpp"

#include <fstream>

#include "assets.hpp"
#include "sceneagent/backend/client.hpp"
#include "sceneagent/error.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::scenegen {

using nlohmann::json;

std::string_view to_string(EntityKind kind) {
    switch (kind) {
        case EntityKind::instrument: return "instrument";
        case EntityKind::anatomy: return "anatomy";
        case EntityKind::person: return "person";
        case EntityKind::equipment: return "equipment";
        case EntityKind::other: return "other";
    }
    return "other";
}

std::optional<EntityKind> kind_from_string(std::string_view s) {
    for (auto k : {EntityKind::instrument, EntityKind::anatomy, EntityKind::person, EntityKind::equipment,
                   EntityKind::other}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::string normalize_label(std::string_view raw) {
    std::string s = text::to_lower(raw);
    for (char& c : s) {
        if (c == '_' || c == '-') c = ' ';
    }
    return text::collapse_whitespace(text::trim(s));
}

Vocabulary Vocabulary::from_json(const json& doc) {
    Vocabulary v;
    try {
        v.version_ = doc.at("version").get<std::string>();
        for (const auto& c : doc.at("categories")) {
            CanonicalCategory cat;
            cat.id = c.at("id").get<std::string>();
            const auto kind = kind_from_string(c.at("kind").get<std::string>());
            if (!kind) throw Error(ErrorCode::invalid_argument, "unknown kind for category " + cat.id);
            cat.kind = *kind;
            for (const auto& s : c.value("synonyms", json::array())) cat.synonyms.push_back(s.get<std::string>());
            if (v.find(cat.id)) throw Error(ErrorCode::invalid_argument, "duplicate category id " + cat.id);
            v.categories_.push_back(std::move(cat));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("vocabulary: ") + e.what());
    }
    auto add = [&v](const std::string& form, const std::string& id) {
        const auto [it, inserted] = v.table_.emplace(normalize_label(form), id);
        if (!inserted && it->second != id) {
            throw Error(ErrorCode::invalid_argument, "synonym '" + form + "' maps to both " + it->second + " and " + id);
        }
    };
    for (const auto& cat : v.categories_) {
        add(cat.id, cat.id);
        for (const auto& syn : cat.synonyms) add(syn, cat.id);
    }
    return v;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "vocabulary not found: " + path.string());
    return from_json(json::parse(in));
}

const Vocabulary& Vocabulary::clinical() {
    static const Vocabulary vocab = from_json(json::parse(assets::k_clinical_v1_json));
    return vocab;
}

const CanonicalCategory* Vocabulary::find(std::string_view id) const {
    for (const auto& c : categories_) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

EntityKind Vocabulary::kind_of(std::string_view id) const {
    const auto* c = find(id);
    return c ? c->kind : EntityKind::other;
}

std::optional<std::string> Vocabulary::lookup(const std::string& normalized) const {
    if (auto it = table_.find(normalized); it != table_.end()) return it->second;
    return std::nullopt;
}

std::vector<std::pair<std::string, std::string>> Vocabulary::surface_forms() const {
    return {table_.begin(), table_.end()};
}

std::string canonicalize(std::string_view raw_label, const Vocabulary& vocabulary,
                         const backend::ModelClient* canonicalizer) {
    const auto normalized = normalize_label(raw_label);
    if (auto hit = vocabulary.lookup(normalized)) return *hit;
    if (normalized.size() > 1 && normalized.back() == 's') {
        if (auto hit = vocabulary.lookup(normalized.substr(0, normalized.size() - 1))) return *hit;
    }
    if (canonicalizer) {
        std::string ids;
        for (const auto& c : vocabulary.categories()) ids += "- " + c.id + "\n";
        backend::ChatRequest req;
        req.messages.push_back(backend::ChatMessage::text(
            backend::Role::user,
            text::render_template(assets::k_canonicalize_v1_txt, {{"label", std::string(raw_label)}, {"ids", ids}})));
        req.max_tokens = 16;
        try {
            const auto response = canonicalizer->complete(std::move(req));
            std::string answer = text::to_lower(text::trim(response.text));
            while (!answer.empty() && (answer.back() == '.' || answer.back() == '"' || answer.back() == '\'')) {
                answer.pop_back();
            }
            while (!answer.empty() && (answer.front() == '"' || answer.front() == '\'')) answer.erase(0, 1);
            if (vocabulary.find(answer)) return answer;
        } catch (const Error&) {
            // Treated as a miss; canonicalization is total.
        }
    }
    return std::string(kUnknownCategory);
}

}  // namespace sceneagent::scenegen
