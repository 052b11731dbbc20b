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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sceneagent/eval/qa.hpp"

namespace sceneagent::eval {

/// round_half_up(1000 * correct / total) computed exactly in integers, i.e. the
/// percentage in tenths. total must be positive.
std::int64_t pct_tenths(std::int64_t correct, std::int64_t total);

/// "77.8", "100.0"; "n/a" when total is 0.
std::string format_pct(std::int64_t correct, std::int64_t total);

/// Every correct count c in [0, total] whose percentage prints as `printed`.
std::vector<std::int64_t> invert_pct(std::string_view printed, std::int64_t total);

struct CategoryReport {
    std::string task_type;
    std::int64_t correct = 0;
    std::int64_t total = 0;

    std::string accuracy_pct() const { return format_pct(correct, total); }
    bool operator==(const CategoryReport&) const = default;
};

struct ComparisonRow {
    std::string label;
    double score = 0.0;

    bool operator==(const ComparisonRow&) const = default;
};

struct BenchmarkReport {
    std::vector<CategoryReport> categories;  // task_type asc
    std::vector<CategoryReport> domains;     // domain asc; empty when no item has one
    std::int64_t overall_correct = 0;
    std::int64_t overall_total = 0;
    std::string prompt_version = std::string(kJudgePromptVersion);
    std::vector<ComparisonRow> comparison;
    std::int64_t flagged = 0;
    std::int64_t errored = 0;

    std::string overall_pct() const { return format_pct(overall_correct, overall_total); }
    /// Sums of the category rows equal the overall counts.
    bool accounting_holds() const;
    bool operator==(const BenchmarkReport&) const = default;
};

/// Groups records by their item's task_type (and domain). Abstentions are
/// incorrect. Throws Error{missing_item} for a record without an item.
BenchmarkReport aggregate(std::span<const RunRecord> records, std::span<const QAItem> items);

/// Same fold over precomputed (task_type, correct, total) rows.
BenchmarkReport aggregate_counts(std::span<const CategoryReport> rows);

/// A table as printed elsewhere: rows with their printed percentage, and the
/// printed overall line.
struct PublishedTable {
    struct Row {
        std::string task_type;
        std::optional<std::int64_t> correct;
        std::int64_t total = 0;
        std::string printed_pct;
    };
    std::vector<Row> rows;
    std::optional<std::int64_t> overall_correct;
    std::optional<std::int64_t> overall_total;
    std::optional<std::string> overall_pct;
};

PublishedTable published_from_json(const nlohmann::json& doc);

/// Row counts of a published table, inverting percentages where needed.
/// Throws Error{invalid_argument} when a row cannot be inverted uniquely.
std::vector<CategoryReport> published_counts(const PublishedTable& table);

struct Discrepancy {
    std::string where;  // task_type or "overall"
    std::string field;  // "pct", "correct", "total"
    std::string printed;
    std::string computed;

    bool operator==(const Discrepancy&) const = default;
};

/// Recomputes every printed number from the row counts and lists each that
/// disagrees, including an overall line that does not equal the row sums.
/// Rows without a printed correct count are inverted from their percentage;
/// an inversion that is not unique is reported with field "correct".
std::vector<Discrepancy> reconcile(const PublishedTable& table);

enum class ReportStyle { text, json };

std::string format_report(const BenchmarkReport& report, ReportStyle style);
nlohmann::json report_to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(const nlohmann::json& doc);

}  // namespace sceneagent::eval
