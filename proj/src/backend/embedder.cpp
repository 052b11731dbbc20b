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

#include "sceneagent/backend/embedder.hpp"

#include <cmath>

#include "sceneagent/backend/client.hpp"
#include "sceneagent/error.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::backend {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

HashingEmbedder::HashingEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw Error(ErrorCode::invalid_argument, "embedding dimension must be >= 1");
}

std::size_t HashingEmbedder::bucket(std::string_view token) const {
    return static_cast<std::size_t>(fnv1a64(token) % dim_);
}

std::vector<float> HashingEmbedder::embed(std::string_view input) const {
    std::vector<double> acc(dim_, 0.0);
    for (const auto& token : text::alnum_tokens(text::to_lower(input))) acc[bucket(token)] += 1.0;
    double norm = 0.0;
    for (double v : acc) norm += v * v;
    std::vector<float> out(dim_, 0.0f);
    if (norm == 0.0) return out;
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = static_cast<float>(acc[i] / norm);
    return out;
}

std::vector<float> embed(const BackendProfile& profile, std::string_view text) {
    return HashingEmbedder(profile.embed_dim).embed(text);
}

double cosine(std::span<const float> a, std::span<const float> b) {
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        dot += static_cast<double>(a[i]) * b[i];
        na += static_cast<double>(a[i]) * a[i];
        nb += static_cast<double>(b[i]) * b[i];
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot / std::sqrt(na * nb);
}

}  // namespace sceneagent::backend
