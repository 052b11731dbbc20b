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
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sceneagent/scenegen/vocabulary.hpp"

namespace sceneagent::backend {
class ModelClient;
}

namespace sceneagent::retrieval {

struct Document {
    std::string doc_id;
    std::string text;
};

struct DocChunk {
    std::string chunk_id;
    std::string doc_id;
    std::string text;
    std::size_t start = 0;  // byte span in the source document
    std::size_t end = 0;
    std::vector<std::string> entities;

    bool operator==(const DocChunk&) const = default;
};

/// Dense index: one unit-or-zero row per chunk, row-major.
struct VectorIndex {
    std::size_t dim = 256;
    std::vector<std::string> ids;
    std::vector<float> rows;

    std::span<const float> row(std::size_t i) const { return {rows.data() + i * dim, dim}; }
    bool operator==(const VectorIndex&) const = default;
};

/// Entity graph: entity -> chunks mentioning it, plus symmetric co-occurrence
/// counts (number of chunks mentioning both).
struct KGIndex {
    std::map<std::string, std::set<std::string>> entity_chunks;
    std::map<std::pair<std::string, std::string>, std::size_t> cooccurrence;

    std::size_t cooccurrence_count(const std::string& a, const std::string& b) const;
    bool operator==(const KGIndex&) const = default;
};

struct RetrievalIndex {
    std::map<std::string, DocChunk> chunks;
    VectorIndex vectors;
    KGIndex graph;

    const DocChunk* chunk(const std::string& id) const;
    bool operator==(const RetrievalIndex&) const = default;
};

/// Paragraphs (blank-line separated) packed greedily into spans of at most
/// chunk_size bytes; a paragraph longer than chunk_size is hard-split (never
/// inside a UTF-8 sequence).
std::vector<std::pair<std::size_t, std::size_t>> chunk_spans(std::string_view text, std::size_t chunk_size);

/// Case-insensitive, word-bounded vocabulary matching (ids with '_' read as
/// spaces and synonyms; a trailing plural 's' is allowed). Sorted, unique.
std::vector<std::string> extract_entities(std::string_view text, const scenegen::Vocabulary& vocabulary);

/// Throws Error{empty_corpus} when no document contributes a chunk and
/// Error{invalid_argument} when chunk_size < 128. An extractor backend may add
/// vocabulary ids to a chunk but never removes deterministic matches.
RetrievalIndex ingest_corpus(std::span<const Document> docs, std::size_t chunk_size,
                             const scenegen::Vocabulary& vocabulary, const backend::ModelClient* extractor = nullptr,
                             std::size_t dim = 256);

/// Corpus manifest: {doc_id: path}, paths relative to the manifest.
std::vector<Document> load_corpus(const std::filesystem::path& manifest);

nlohmann::json index_to_json(const RetrievalIndex& index);
RetrievalIndex index_from_json(const nlohmann::json& doc);
void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
RetrievalIndex load_index(const std::filesystem::path& path);

}  // namespace sceneagent::retrieval
