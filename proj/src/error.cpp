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

#include "sceneagent/error.hpp"

namespace sceneagent {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "InvalidArgument";
        case ErrorCode::io_error: return "IoError";
        case ErrorCode::missing_frame_file: return "MissingFrameFile";
        case ErrorCode::malformed_frame: return "MalformedFrame";
        case ErrorCode::bad_manifest: return "BadManifest";
        case ErrorCode::out_of_order_observation: return "OutOfOrderObservation";
        case ErrorCode::timeout: return "Timeout";
        case ErrorCode::malformed_response: return "MalformedResponse";
        case ErrorCode::fixture_miss: return "FixtureMiss";
        case ErrorCode::budget_exceeded: return "BudgetExceeded";
        case ErrorCode::backend_unavailable: return "BackendUnavailable";
        case ErrorCode::unparsable_action: return "UnparsableAction";
        case ErrorCode::max_steps_exceeded: return "MaxStepsExceeded";
        case ErrorCode::unknown_frame_order: return "UnknownFrameOrder";
        case ErrorCode::syntax_error: return "SyntaxError";
        case ErrorCode::unbound_variable: return "UnboundVariable";
        case ErrorCode::invalid_field: return "InvalidField";
        case ErrorCode::empty_corpus: return "EmptyCorpus";
        case ErrorCode::schema_error: return "SchemaError";
        case ErrorCode::duplicate_id: return "DuplicateId";
        case ErrorCode::missing_item: return "MissingItem";
        case ErrorCode::not_found: return "NotFound";
        case ErrorCode::conflict: return "Conflict";
    }
    return "Unknown";
}

}  // namespace sceneagent
