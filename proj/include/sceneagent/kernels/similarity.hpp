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
#include <span>
#include <vector>

namespace sceneagent::kernels {

/// Cosine similarity of `query` against each row of a row-major matrix with
/// `dim` columns. Zero rows (or a zero query) score 0. OpenMP-parallel over rows.
std::vector<double> cosine_scores(std::span<const float> query, std::span<const float> rows, std::size_t dim);

namespace reference {
std::vector<double> cosine_scores(std::span<const float> query, std::span<const float> rows, std::size_t dim);
}

}  // namespace sceneagent::kernels
