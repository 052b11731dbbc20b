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

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace sceneagent {

enum class ErrorCode {
    invalid_argument,
    io_error,
    // media
    missing_frame_file,
    malformed_frame,
    bad_manifest,
    out_of_order_observation,
    // backend
    timeout,
    malformed_response,
    fixture_miss,
    budget_exceeded,
    backend_unavailable,
    // agent
    unparsable_action,
    max_steps_exceeded,
    // scenegen
    unknown_frame_order,
    // graphqa
    syntax_error,
    unbound_variable,
    invalid_field,
    // retrieval
    empty_corpus,
    // eval
    schema_error,
    duplicate_id,
    missing_item,
    // service
    not_found,
    conflict,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library is reported as an Error carrying a closed
/// code plus an optional structured payload (parser offsets, digests, ...).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json detail = nullptr)
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    nlohmann::json detail_;
};

}  // namespace sceneagent
