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

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sceneagent::backend {

struct BackendProfile;

std::uint64_t fnv1a64(std::string_view bytes);

/// Deterministic bag-of-words embedder: lowercase, split on non-alphanumerics,
/// bucket each token by FNV-1a 64 mod dim, count, L2-normalize.
class HashingEmbedder {
public:
    explicit HashingEmbedder(std::size_t dim = 256);
    std::vector<float> embed(std::string_view text) const;
    std::size_t bucket(std::string_view token) const;
    std::size_t dim() const { return dim_; }

private:
    std::size_t dim_;
};

std::vector<float> embed(const BackendProfile& profile, std::string_view text);

double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace sceneagent::backend
