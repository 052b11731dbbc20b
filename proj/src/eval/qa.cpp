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

#include "sceneagent/eval/qa.hpp"

#include <cctype>
#include <fstream>
#include <set>

#include "assets.hpp"
#include "sceneagent/backend/client.hpp"
#include "sceneagent/error.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::eval {

using nlohmann::json;

namespace {

[[noreturn]] void schema_error(const std::string& message) { throw Error(ErrorCode::schema_error, message); }

std::string required_string(const json& doc, const char* key) {
    if (!doc.contains(key) || !doc[key].is_string()) schema_error(std::string("field '") + key + "' must be a string");
    return doc[key].get<std::string>();
}

}  // namespace

QAItem qa_item_from_json(const json& doc) {
    if (!doc.is_object()) schema_error("item must be a JSON object");
    QAItem item;
    item.item_id = required_string(doc, "item_id");
    item.video_id = required_string(doc, "video_id");
    item.question = required_string(doc, "question");
    const auto kind = required_string(doc, "kind");
    if (kind == "mcq") {
        item.kind = QAKind::mcq;
    } else if (kind == "open") {
        item.kind = QAKind::open;
    } else {
        schema_error("kind must be \"mcq\" or \"open\"");
    }
    item.gold = required_string(doc, "gold");
    item.task_type = required_string(doc, "task_type");
    if (text::trim(item.item_id).empty()) schema_error("item_id must be non-empty");
    if (text::trim(item.task_type).empty()) schema_error("task_type must be non-empty");
    if (doc.contains("domain") && !doc["domain"].is_null()) {
        if (!doc["domain"].is_string()) schema_error("domain must be a string or null");
        item.domain = doc["domain"].get<std::string>();
    }
    const json options = doc.contains("options") ? doc["options"] : json(nullptr);
    if (item.kind == QAKind::mcq) {
        if (!options.is_array() || options.size() < 2 || options.size() > 4) {
            schema_error("mcq items need 2 to 4 options");
        }
        std::set<std::string> letters;
        for (const auto& opt : options) {
            if (!opt.is_array() || opt.size() != 2 || !opt[0].is_string() || !opt[1].is_string()) {
                schema_error("each option must be [letter, text]");
            }
            auto letter = opt[0].get<std::string>();
            if (letter.size() != 1 || !std::isupper(static_cast<unsigned char>(letter[0]))) {
                schema_error("option letters must be single uppercase letters");
            }
            if (!letters.insert(letter).second) schema_error("duplicate option letter " + letter);
            item.options.emplace_back(letter, opt[1].get<std::string>());
        }
        if (!letters.contains(item.gold)) schema_error("gold '" + item.gold + "' is not an option letter");
    } else if (!options.is_null() && !(options.is_array() && options.empty())) {
        schema_error("open items take no options");
    }
    return item;
}

json qa_item_to_json(const QAItem& item) {
    json options = nullptr;
    if (item.kind == QAKind::mcq) {
        options = json::array();
        for (const auto& [letter, body] : item.options) options.push_back(json::array({letter, body}));
    }
    return json{{"item_id", item.item_id},
                {"video_id", item.video_id},
                {"question", item.question},
                {"kind", item.kind == QAKind::mcq ? "mcq" : "open"},
                {"options", options},
                {"gold", item.gold},
                {"task_type", item.task_type},
                {"domain", item.domain ? json(*item.domain) : json(nullptr)}};
}

std::vector<QAItem> parse_qa(std::istream& in) {
    std::vector<QAItem> items;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
            auto item = qa_item_from_json(json::parse(line));
            if (!seen.insert(item.item_id).second) {
                throw Error(ErrorCode::duplicate_id, "line " + std::to_string(line_no) + ": duplicate item_id " + item.item_id,
                            {{"line", line_no}, {"item_id", item.item_id}});
            }
            items.push_back(std::move(item));
        } catch (const json::exception& e) {
            throw Error(ErrorCode::schema_error, "line " + std::to_string(line_no) + ": " + e.what(), {{"line", line_no}});
        } catch (const Error& e) {
            if (e.code() != ErrorCode::schema_error) throw;
            throw Error(ErrorCode::schema_error, "line " + std::to_string(line_no) + ": " + e.what(), {{"line", line_no}});
        }
    }
    return items;
}

std::vector<QAItem> load_qa(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "QA file not found: " + path.string());
    return parse_qa(in);
}

std::string render_question(const QAItem& item) {
    std::string out = item.question;
    for (const auto& [letter, body] : item.options) out += "\n(" + letter + ") " + body;
    if (item.kind == QAKind::mcq) out += "\nAnswer with the option letter.";
    return out;
}

McqScore score_mcq(std::string_view predicted, std::string_view gold, std::string_view letters) {
    std::string norm = text::to_upper(text::trim(predicted));
    while (!norm.empty() && std::ispunct(static_cast<unsigned char>(norm.back())) && norm.back() != ')') norm.pop_back();
    const std::string allowed = letters.empty() ? std::string("ABCD") : std::string(letters);

    McqScore score;
    auto is_word = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    for (std::size_t i = 0; i < norm.size(); ++i) {
        const char c = norm[i];
        if (!std::isupper(static_cast<unsigned char>(c))) continue;
        const bool left = i == 0 || !is_word(norm[i - 1]);
        const bool right = i + 1 == norm.size() || !is_word(norm[i + 1]);
        if (left && right && allowed.find(c) != std::string::npos) {
            score.letter = c;
            break;
        }
    }
    if (!score.letter) {
        score.flagged = true;
        return score;
    }
    score.correct = gold.size() == 1 && std::toupper(static_cast<unsigned char>(gold[0])) == *score.letter;
    return score;
}

namespace {

std::optional<Verdict> parse_verdict(const std::string& reply) {
    try {
        const auto doc = json::parse(text::trim(reply));
        if (!doc.is_object() || !doc.contains("equivalent") || !doc["equivalent"].is_boolean() ||
            !doc.contains("justification") || !doc["justification"].is_string()) {
            return std::nullopt;
        }
        return Verdict{doc["equivalent"].get<bool>(), doc["justification"].get<std::string>()};
    } catch (const json::exception&) {
        return std::nullopt;
    }
}

}  // namespace

Verdict judge_open(std::string_view question, std::string_view predicted, std::string_view gold,
                   const backend::ModelClient& judge) {
    const std::vector<std::pair<std::string, std::string>> values{
        {"question", std::string(question)}, {"gold", std::string(gold)}, {"predicted", std::string(predicted)}};
    for (const auto tmpl : {assets::k_judge_v1_txt, assets::k_judge_strict_v1_txt}) {
        backend::ChatRequest req;
        req.messages.push_back(backend::ChatMessage::text(backend::Role::user, text::render_template(tmpl, values)));
        req.max_tokens = 256;
        std::string reply;
        try {
            reply = judge.complete(std::move(req)).text;
        } catch (const Error&) {
            return {false, "judge_error"};
        }
        if (auto verdict = parse_verdict(reply)) return *verdict;
    }
    return {false, "judge_unparsable"};
}

json record_to_json(const RunRecord& r) {
    return json{{"item_id", r.item_id},
                {"predicted", r.predicted},
                {"correct", r.correct},
                {"confidence", r.confidence},
                {"abstained", r.abstained},
                {"judge_justification", r.judge_justification ? json(*r.judge_justification) : json(nullptr)},
                {"latency_ms", r.latency_ms},
                {"flagged", r.flagged},
                {"error", r.error ? json(*r.error) : json(nullptr)}};
}

RunRecord record_from_json(const json& doc) {
    try {
        RunRecord r;
        r.item_id = doc.at("item_id").get<std::string>();
        r.predicted = doc.value("predicted", "");
        r.correct = doc.value("correct", false);
        r.confidence = doc.value("confidence", 0.0);
        r.abstained = doc.value("abstained", false);
        if (doc.contains("judge_justification") && doc["judge_justification"].is_string()) {
            r.judge_justification = doc["judge_justification"].get<std::string>();
        }
        r.latency_ms = doc.value("latency_ms", std::int64_t{0});
        r.flagged = doc.value("flagged", false);
        if (doc.contains("error") && doc["error"].is_string()) r.error = doc["error"].get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::schema_error, std::string("run record: ") + e.what());
    }
}

RunRecord score_item(const QAItem& item, const Prediction& prediction, const backend::ModelClient* judge,
                     std::int64_t latency_ms) {
    RunRecord r;
    r.item_id = item.item_id;
    r.predicted = prediction.answer;
    r.confidence = prediction.confidence;
    r.abstained = prediction.abstained;
    r.latency_ms = latency_ms;
    if (item.kind == QAKind::mcq) {
        std::string letters;
        for (const auto& [letter, body] : item.options) letters += letter;
        const auto s = score_mcq(prediction.answer, item.gold, letters);
        r.correct = s.correct && !prediction.abstained;
        r.flagged = s.flagged;
        return r;
    }
    if (prediction.abstained) return r;
    if (!judge) {
        r.error = "no judge backend configured";
        return r;
    }
    const auto verdict = judge_open(item.question, prediction.answer, item.gold, *judge);
    r.correct = verdict.equivalent;
    r.judge_justification = verdict.justification;
    if (verdict.justification == "judge_error") r.error = "judge_error";
    return r;
}

}  // namespace sceneagent::eval
