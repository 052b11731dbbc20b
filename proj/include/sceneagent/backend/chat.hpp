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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace sceneagent::backend {

enum class Role { system, user, assistant };

struct TextPart {
    std::string text;
};

/// A frame travels by reference: its path plus a content hash computed at
/// send time. The file must exist when the request is serialized.
struct ImageRef {
    std::filesystem::path path;
    std::size_t frame_index = 0;
};

using ContentPart = std::variant<TextPart, ImageRef>;

struct ChatMessage {
    Role role = Role::user;
    std::vector<ContentPart> parts;

    static ChatMessage text(Role role, std::string body) { return ChatMessage{role, {TextPart{std::move(body)}}}; }
};

struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    int max_tokens = 512;
    int sample_index = 0;
    std::optional<std::int64_t> seed;

    void validate() const;
};

enum class FinishReason { stop, length, error };

struct Usage {
    int prompt_tokens = 0;
    int completion_tokens = 0;
};

struct ChatResponse {
    std::string text;
    FinishReason finish_reason = FinishReason::stop;
    std::optional<Usage> usage;
};

std::string_view to_string(Role role);
std::string_view to_string(FinishReason reason);
FinishReason finish_reason_from_string(std::string_view s);

/// Wire body: {model, messages:[{role, content:[{type:"text",text} |
/// {type:"image_ref",path,frame_index,sha256}]}], temperature, max_tokens,
/// seed, sample_index}.
nlohmann::json request_body(const ChatRequest& req);

/// Cache-key form of the request: the wire body with image paths reduced to
/// their file name (the content hash already pins the bytes), serialized with
/// sorted keys and no insignificant whitespace.
std::string canonical_request(const ChatRequest& req);

/// Hex SHA-256 of canonical_request(req).
std::string cache_digest(const ChatRequest& req);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256_hex(const std::filesystem::path& path);

}  // namespace sceneagent::backend
