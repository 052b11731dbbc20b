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

#include "sceneagent/retrieval/index.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "assets.hpp"
#include "sceneagent/backend/client.hpp"
#include "sceneagent/backend/embedder.hpp"
#include "sceneagent/error.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::retrieval {

using nlohmann::json;

std::size_t KGIndex::cooccurrence_count(const std::string& a, const std::string& b) const {
    auto it = cooccurrence.find({a, b});
    return it == cooccurrence.end() ? 0 : it->second;
}

const DocChunk* RetrievalIndex::chunk(const std::string& id) const {
    auto it = chunks.find(id);
    return it == chunks.end() ? nullptr : &it->second;
}

namespace {

bool blank(std::string_view line) {
    return std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::vector<std::pair<std::size_t, std::size_t>> paragraphs(std::string_view text) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t pos = 0;
    std::optional<std::size_t> para_start;
    std::size_t para_end = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const std::size_t line_end = nl == std::string_view::npos ? text.size() : nl;
        const auto line = text.substr(pos, line_end - pos);
        if (blank(line)) {
            if (para_start) out.emplace_back(*para_start, para_end);
            para_start.reset();
        } else {
            if (!para_start) para_start = pos;
            para_end = line_end;
        }
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    if (para_start) out.emplace_back(*para_start, para_end);
    return out;
}

bool word_byte(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u);
}

}  // namespace

std::vector<std::pair<std::size_t, std::size_t>> chunk_spans(std::string_view text, std::size_t chunk_size) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::optional<std::pair<std::size_t, std::size_t>> open;
    for (auto [start, end] : paragraphs(text)) {
        if (end - start > chunk_size) {
            if (open) spans.push_back(*open);
            open.reset();
            std::size_t s = start;
            while (s < end) {
                std::size_t e = std::min(end, s + chunk_size);
                while (e < end && e > s + 1 && (static_cast<unsigned char>(text[e]) & 0xC0) == 0x80) --e;
                spans.emplace_back(s, e);
                s = e;
            }
            continue;
        }
        if (open && end - open->first <= chunk_size) {
            open->second = end;
        } else {
            if (open) spans.push_back(*open);
            open = std::make_pair(start, end);
        }
    }
    if (open) spans.push_back(*open);
    return spans;
}

std::vector<std::string> extract_entities(std::string_view input, const scenegen::Vocabulary& vocabulary) {
    std::string hay = text::to_lower(input);
    for (char& c : hay) {
        if (!word_byte(c)) c = ' ';
    }
    std::set<std::string> found;
    for (const auto& [surface, id] : vocabulary.surface_forms()) {
        if (surface.empty() || found.contains(id)) continue;
        std::size_t pos = 0;
        while ((pos = hay.find(surface, pos)) != std::string::npos) {
            const bool left_ok = pos == 0 || !word_byte(hay[pos - 1]);
            std::size_t after = pos + surface.size();
            if (after < hay.size() && hay[after] == 's' && (after + 1 == hay.size() || !word_byte(hay[after + 1]))) {
                ++after;
            }
            const bool right_ok = after == hay.size() || !word_byte(hay[after]);
            if (left_ok && right_ok) {
                found.insert(id);
                break;
            }
            ++pos;
        }
    }
    return {found.begin(), found.end()};
}

namespace {

std::vector<std::string> backend_entities(const backend::ModelClient& extractor, const std::string& chunk_text,
                                          const scenegen::Vocabulary& vocabulary) {
    std::string ids;
    for (const auto& c : vocabulary.categories()) ids += "- " + c.id + "\n";
    backend::ChatRequest req;
    req.messages.push_back(backend::ChatMessage::text(
        backend::Role::user, text::render_template(assets::k_entities_v1_txt, {{"text", chunk_text}, {"ids", ids}})));
    req.max_tokens = 128;
    std::vector<std::string> out;
    try {
        const auto response = extractor.complete(std::move(req));
        const auto doc = json::parse(response.text);
        for (const auto& v : doc) {
            if (v.is_string() && vocabulary.find(v.get<std::string>())) out.push_back(v.get<std::string>());
        }
    } catch (const std::exception&) {
        // Additive only: a failed extraction contributes nothing.
    }
    return out;
}

}  // namespace

RetrievalIndex ingest_corpus(std::span<const Document> docs, std::size_t chunk_size,
                             const scenegen::Vocabulary& vocabulary, const backend::ModelClient* extractor,
                             std::size_t dim) {
    if (chunk_size < 128) throw Error(ErrorCode::invalid_argument, "chunk_size must be >= 128");
    RetrievalIndex index;
    index.vectors.dim = dim;
    const backend::HashingEmbedder embedder(dim);

    for (const auto& doc : docs) {
        std::size_t ordinal = 0;
        for (const auto& [start, end] : chunk_spans(doc.text, chunk_size)) {
            char suffix[16];
            std::snprintf(suffix, sizeof suffix, "#%04zu", ordinal++);
            DocChunk chunk{doc.doc_id + suffix, doc.doc_id, doc.text.substr(start, end - start), start, end, {}};
            chunk.entities = extract_entities(chunk.text, vocabulary);
            if (extractor) {
                auto extra = backend_entities(*extractor, chunk.text, vocabulary);
                chunk.entities.insert(chunk.entities.end(), extra.begin(), extra.end());
                std::sort(chunk.entities.begin(), chunk.entities.end());
                chunk.entities.erase(std::unique(chunk.entities.begin(), chunk.entities.end()), chunk.entities.end());
            }
            if (index.chunks.contains(chunk.chunk_id)) {
                throw Error(ErrorCode::invalid_argument, "duplicate chunk id " + chunk.chunk_id);
            }
            index.chunks.emplace(chunk.chunk_id, std::move(chunk));
        }
    }
    if (index.chunks.empty()) throw Error(ErrorCode::empty_corpus, "corpus has no non-blank text");

    for (const auto& [id, chunk] : index.chunks) {
        const auto v = embedder.embed(chunk.text);
        index.vectors.ids.push_back(id);
        index.vectors.rows.insert(index.vectors.rows.end(), v.begin(), v.end());
        for (const auto& e : chunk.entities) index.graph.entity_chunks[e].insert(id);
        for (std::size_t i = 0; i < chunk.entities.size(); ++i) {
            for (std::size_t j = i + 1; j < chunk.entities.size(); ++j) {
                ++index.graph.cooccurrence[{chunk.entities[i], chunk.entities[j]}];
                ++index.graph.cooccurrence[{chunk.entities[j], chunk.entities[i]}];
            }
        }
    }
    return index;
}

std::vector<Document> load_corpus(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw Error(ErrorCode::io_error, "corpus manifest not found: " + manifest.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, manifest.string() + ": " + e.what());
    }
    std::vector<Document> docs;
    for (const auto& [doc_id, path] : doc.items()) {
        std::filesystem::path p(path.get<std::string>());
        if (p.is_relative()) p = manifest.parent_path() / p;
        std::ifstream f(p, std::ios::binary);
        if (!f) throw Error(ErrorCode::io_error, "corpus document not found: " + p.string());
        docs.push_back({doc_id, std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>())});
    }
    return docs;
}

json index_to_json(const RetrievalIndex& index) {
    json chunks = json::array();
    for (const auto& [id, c] : index.chunks) {
        chunks.push_back({{"chunk_id", c.chunk_id},
                          {"doc_id", c.doc_id},
                          {"text", c.text},
                          {"start", c.start},
                          {"end", c.end},
                          {"entities", c.entities}});
    }
    json vectors = json::object();
    for (std::size_t i = 0; i < index.vectors.ids.size(); ++i) {
        const auto row = index.vectors.row(i);
        vectors[index.vectors.ids[i]] = std::vector<float>(row.begin(), row.end());
    }
    json cooc = json::array();
    for (const auto& [pair, count] : index.graph.cooccurrence) cooc.push_back(json::array({pair.first, pair.second, count}));
    return json{{"version", 1},
                {"dim", index.vectors.dim},
                {"chunks", chunks},
                {"vectors", vectors},
                {"kg", {{"entities", index.graph.entity_chunks}, {"cooccurrence", cooc}}}};
}

RetrievalIndex index_from_json(const json& doc) {
    RetrievalIndex index;
    try {
        index.vectors.dim = doc.at("dim").get<std::size_t>();
        for (const auto& c : doc.at("chunks")) {
            DocChunk chunk{c.at("chunk_id").get<std::string>(),
                           c.at("doc_id").get<std::string>(),
                           c.at("text").get<std::string>(),
                           c.at("start").get<std::size_t>(),
                           c.at("end").get<std::size_t>(),
                           c.at("entities").get<std::vector<std::string>>()};
            index.chunks.emplace(chunk.chunk_id, std::move(chunk));
        }
        for (const auto& [id, row] : doc.at("vectors").items()) {
            auto v = row.get<std::vector<float>>();
            if (v.size() != index.vectors.dim) throw Error(ErrorCode::invalid_argument, "vector length mismatch for " + id);
            index.vectors.ids.push_back(id);
            index.vectors.rows.insert(index.vectors.rows.end(), v.begin(), v.end());
        }
        index.graph.entity_chunks = doc.at("kg").at("entities").get<std::map<std::string, std::set<std::string>>>();
        for (const auto& t : doc.at("kg").at("cooccurrence")) {
            index.graph.cooccurrence[{t.at(0).get<std::string>(), t.at(1).get<std::string>()}] = t.at(2).get<std::size_t>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, std::string("index snapshot: ") + e.what());
    }
    for (const auto& [entity, ids] : index.graph.entity_chunks) {
        for (const auto& id : ids) {
            if (!index.chunks.contains(id)) throw Error(ErrorCode::invalid_argument, "index references missing chunk " + id);
        }
    }
    return index;
}

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
    out << index_to_json(index).dump() << '\n';
}

RetrievalIndex load_index(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "index snapshot not found: " + path.string());
    try {
        return index_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw Error(ErrorCode::invalid_argument, path.string() + ": " + e.what());
    }
}

}  // namespace sceneagent::retrieval
