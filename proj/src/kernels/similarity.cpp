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

#include "sceneagent/kernels/similarity.hpp"

#include <cmath>

namespace sceneagent::kernels {

std::vector<double> cosine_scores(std::span<const float> query, std::span<const float> rows, std::size_t dim) {
    const std::size_t n = dim == 0 ? 0 : rows.size() / dim;
    std::vector<double> scores(n, 0.0);
    double qq = 0.0;
    for (float q : query) qq += static_cast<double>(q) * q;
    if (qq == 0.0) return scores;

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(n); ++r) {
        const float* row = rows.data() + static_cast<std::size_t>(r) * dim;
        double dot = 0.0;
        double rn = 0.0;
#pragma omp simd reduction(+ : dot, rn)
        for (std::size_t d = 0; d < dim; ++d) {
            dot += static_cast<double>(row[d]) * query[d];
            rn += static_cast<double>(row[d]) * row[d];
        }
        scores[static_cast<std::size_t>(r)] = rn == 0.0 ? 0.0 : dot / std::sqrt(qq * rn);
    }
    return scores;
}

namespace reference {

std::vector<double> cosine_scores(std::span<const float> query, std::span<const float> rows, std::size_t dim) {
    std::vector<double> scores;
    for (std::size_t start = 0; dim != 0 && start + dim <= rows.size(); start += dim) {
        double dot = 0.0;
        double qq = 0.0;
        double rr = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
            dot += static_cast<double>(rows[start + d]) * static_cast<double>(query[d]);
            qq += static_cast<double>(query[d]) * static_cast<double>(query[d]);
            rr += static_cast<double>(rows[start + d]) * static_cast<double>(rows[start + d]);
        }
        scores.push_back(qq == 0.0 || rr == 0.0 ? 0.0 : dot / std::sqrt(qq * rr));
    }
    return scores;
}

}  // namespace reference

}  // namespace sceneagent::kernels
