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
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace sceneagent::backend {
class ModelClient;
}

namespace sceneagent::eval {

enum class QAKind { mcq, open };

struct QAItem {
    std::string item_id;
    std::string video_id;
    std::string question;
    QAKind kind = QAKind::mcq;
    std::vector<std::pair<std::string, std::string>> options;  // (letter, text)
    std::string gold;
    std::string task_type;
    std::optional<std::string> domain;

    bool operator==(const QAItem&) const = default;
};

/// Validates one item; throws Error{schema_error}.
QAItem qa_item_from_json(const nlohmann::json& doc);
nlohmann::json qa_item_to_json(const QAItem& item);

/// JSON lines, one item per non-blank line. Errors carry the 1-based line
/// number in their detail ({"line": n}).
std::vector<QAItem> parse_qa(std::istream& in);
std::vector<QAItem> load_qa(const std::filesystem::path& path);

/// The options of an item rendered as "(A) text" lines.
std::string render_question(const QAItem& item);

struct McqScore {
    bool correct = false;
    bool flagged = false;  // no option letter could be found
    std::optional<char> letter;
};

/// Accepts "B", "B.", "(B)", "B) text", "Answer: B", ... The first standalone
/// letter wins; when `letters` is non-empty only those letters count.
McqScore score_mcq(std::string_view predicted, std::string_view gold, std::string_view letters = {});

struct Verdict {
    bool equivalent = false;
    std::string justification;
};

inline constexpr std::string_view kJudgePromptVersion = "judge_v1";

/// One judge call; a non-conforming reply gets one stricter re-ask, then the
/// verdict is false with "judge_unparsable". Backend failures give
/// "judge_error".
Verdict judge_open(std::string_view question, std::string_view predicted, std::string_view gold,
                   const backend::ModelClient& judge);

struct RunRecord {
    std::string item_id;
    std::string predicted;
    bool correct = false;
    double confidence = 0.0;
    bool abstained = false;
    std::optional<std::string> judge_justification;
    std::int64_t latency_ms = 0;
    bool flagged = false;
    std::optional<std::string> error;

    bool operator==(const RunRecord&) const = default;
};

nlohmann::json record_to_json(const RunRecord& r);
RunRecord record_from_json(const nlohmann::json& doc);

struct Prediction {
    std::string answer;
    double confidence = 1.0;
    bool abstained = false;
};

/// Scores one prediction for an item (mcq by letter, open via the judge).
/// Abstained predictions are recorded as incorrect without consulting the
/// judge.
RunRecord score_item(const QAItem& item, const Prediction& prediction, const backend::ModelClient* judge,
                     std::int64_t latency_ms = 0);

}  // namespace sceneagent::eval
