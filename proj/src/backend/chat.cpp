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

#include "sceneagent/backend/chat.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>

#include "sceneagent/error.hpp"

namespace sceneagent::backend {

using nlohmann::json;

std::string_view to_string(Role role) {
    switch (role) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

std::string_view to_string(FinishReason reason) {
    switch (reason) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

FinishReason finish_reason_from_string(std::string_view s) {
    if (s == "stop") return FinishReason::stop;
    if (s == "length") return FinishReason::length;
    if (s == "error") return FinishReason::error;
    throw Error(ErrorCode::malformed_response, "unknown finish_reason: " + std::string(s));
}

void ChatRequest::validate() const {
    if (messages.empty()) throw Error(ErrorCode::invalid_argument, "chat request has no messages");
    for (const auto& m : messages) {
        if (m.parts.empty()) throw Error(ErrorCode::invalid_argument, "chat message has no content parts");
        for (const auto& part : m.parts) {
            const auto* image = std::get_if<ImageRef>(&part);
            if (image && !std::filesystem::is_regular_file(image->path)) {
                throw Error(ErrorCode::invalid_argument, "image reference not found: " + image->path.string());
            }
        }
    }
    if (temperature < 0.0 || temperature > 2.0) throw Error(ErrorCode::invalid_argument, "temperature outside [0,2]");
    if (max_tokens <= 0) throw Error(ErrorCode::invalid_argument, "max_tokens must be positive");
    if (sample_index < 0) throw Error(ErrorCode::invalid_argument, "sample_index must be non-negative");
}

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[md[i] >> 4]);
        out.push_back(hex[md[i] & 0xF]);
    }
    return out;
}

std::string file_sha256_hex(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::missing_frame_file, "image reference not found: " + path.string(), path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return sha256_hex(bytes);
}

namespace {

json body_impl(const ChatRequest& req, bool file_names_only) {
    json messages = json::array();
    for (const auto& m : req.messages) {
        json content = json::array();
        for (const auto& part : m.parts) {
            if (const auto* t = std::get_if<TextPart>(&part)) {
                content.push_back({{"type", "text"}, {"text", t->text}});
            } else {
                const auto& img = std::get<ImageRef>(part);
                content.push_back({{"type", "image_ref"},
                                   {"path", file_names_only ? img.path.filename().string() : img.path.string()},
                                   {"frame_index", img.frame_index},
                                   {"sha256", file_sha256_hex(img.path)}});
            }
        }
        messages.push_back({{"role", to_string(m.role)}, {"content", std::move(content)}});
    }
    return json{{"model", req.model_id},
                {"messages", std::move(messages)},
                {"temperature", req.temperature},
                {"max_tokens", req.max_tokens},
                {"seed", req.seed ? json(*req.seed) : json(nullptr)},
                {"sample_index", req.sample_index}};
}

}  // namespace

json request_body(const ChatRequest& req) { return body_impl(req, false); }

std::string canonical_request(const ChatRequest& req) {
    // nlohmann::json objects are std::map backed, so dump() emits sorted keys.
    return body_impl(req, true).dump();
}

std::string cache_digest(const ChatRequest& req) { return sha256_hex(canonical_request(req)); }

}  // namespace sceneagent::backend
