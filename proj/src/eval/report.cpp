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

#include "sceneagent/eval/report.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "sceneagent/error.hpp"
#include "sceneagent/text.hpp"

namespace sceneagent::eval {

using nlohmann::json;

std::int64_t pct_tenths(std::int64_t correct, std::int64_t total) {
    if (total <= 0) throw Error(ErrorCode::invalid_argument, "total must be positive");
    // 1000c/t rounded half up == floor((2000c + t) / 2t) for non-negative c.
    return (2000 * correct + total) / (2 * total);
}

std::string format_pct(std::int64_t correct, std::int64_t total) {
    if (total == 0) return "n/a";
    const auto tenths = pct_tenths(correct, total);
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

std::vector<std::int64_t> invert_pct(std::string_view printed, std::int64_t total) {
    std::vector<std::int64_t> out;
    for (std::int64_t c = 0; c <= total; ++c) {
        if (format_pct(c, total) == printed) out.push_back(c);
    }
    return out;
}

bool BenchmarkReport::accounting_holds() const {
    std::int64_t c = 0, t = 0;
    for (const auto& row : categories) {
        c += row.correct;
        t += row.total;
    }
    return c == overall_correct && t == overall_total;
}

namespace {

std::vector<CategoryReport> to_rows(const std::map<std::string, std::pair<std::int64_t, std::int64_t>>& groups) {
    std::vector<CategoryReport> rows;
    for (const auto& [name, ct] : groups) rows.push_back({name, ct.first, ct.second});
    return rows;
}

}  // namespace

BenchmarkReport aggregate(std::span<const RunRecord> records, std::span<const QAItem> items) {
    std::map<std::string, const QAItem*> by_id;
    for (const auto& item : items) by_id.emplace(item.item_id, &item);

    std::map<std::string, std::pair<std::int64_t, std::int64_t>> by_task, by_domain;
    BenchmarkReport report;
    for (const auto& r : records) {
        auto it = by_id.find(r.item_id);
        if (it == by_id.end()) {
            throw Error(ErrorCode::missing_item, "record for unknown item " + r.item_id, {{"item_id", r.item_id}});
        }
        const bool ok = r.correct && !r.abstained;
        auto& task = by_task[it->second->task_type];
        task.first += ok;
        ++task.second;
        if (it->second->domain) {
            auto& dom = by_domain[*it->second->domain];
            dom.first += ok;
            ++dom.second;
        }
        report.overall_correct += ok;
        ++report.overall_total;
        report.flagged += r.flagged;
        report.errored += r.error.has_value();
    }
    report.categories = to_rows(by_task);
    report.domains = to_rows(by_domain);
    return report;
}

BenchmarkReport aggregate_counts(std::span<const CategoryReport> rows) {
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> groups;
    BenchmarkReport report;
    for (const auto& row : rows) {
        if (row.correct < 0 || row.correct > row.total) {
            throw Error(ErrorCode::invalid_argument, "row " + row.task_type + " needs 0 <= correct <= total");
        }
        auto& g = groups[row.task_type];
        g.first += row.correct;
        g.second += row.total;
        report.overall_correct += row.correct;
        report.overall_total += row.total;
    }
    report.categories = to_rows(groups);
    return report;
}

PublishedTable published_from_json(const json& doc) {
    PublishedTable table;
    try {
        for (const auto& r : doc.at("rows")) {
            PublishedTable::Row row;
            row.task_type = r.at("task_type").get<std::string>();
            if (r.contains("correct") && !r["correct"].is_null()) row.correct = r["correct"].get<std::int64_t>();
            row.total = r.at("total").get<std::int64_t>();
            row.printed_pct = r.at("pct").get<std::string>();
            table.rows.push_back(std::move(row));
        }
        if (doc.contains("overall")) {
            const auto& o = doc["overall"];
            if (o.contains("correct")) table.overall_correct = o["correct"].get<std::int64_t>();
            if (o.contains("total")) table.overall_total = o["total"].get<std::int64_t>();
            if (o.contains("pct")) table.overall_pct = o["pct"].get<std::string>();
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::schema_error, std::string("published table: ") + e.what());
    }
    return table;
}

std::vector<CategoryReport> published_counts(const PublishedTable& table) {
    std::vector<CategoryReport> rows;
    for (const auto& row : table.rows) {
        if (row.correct) {
            rows.push_back({row.task_type, *row.correct, row.total});
            continue;
        }
        const auto candidates = invert_pct(row.printed_pct, row.total);
        if (candidates.size() != 1) {
            throw Error(ErrorCode::invalid_argument,
                        "cannot invert " + row.printed_pct + "% of " + std::to_string(row.total) + " for " + row.task_type);
        }
        rows.push_back({row.task_type, candidates.front(), row.total});
    }
    return rows;
}

std::vector<Discrepancy> reconcile(const PublishedTable& table) {
    std::vector<Discrepancy> out;
    std::int64_t sum_c = 0, sum_t = 0;
    bool sums_known = true;
    for (const auto& row : table.rows) {
        std::int64_t correct = 0;
        if (row.correct) {
            correct = *row.correct;
            const auto computed = format_pct(correct, row.total);
            if (computed != row.printed_pct) out.push_back({row.task_type, "pct", row.printed_pct, computed});
        } else {
            const auto candidates = invert_pct(row.printed_pct, row.total);
            if (candidates.size() != 1) {
                std::string found;
                for (auto c : candidates) found += (found.empty() ? "" : ",") + std::to_string(c);
                out.push_back({row.task_type, "correct", row.printed_pct, found.empty() ? "none" : found});
                sums_known = false;
                continue;
            }
            correct = candidates.front();
        }
        sum_c += correct;
        sum_t += row.total;
    }
    if (table.overall_total && *table.overall_total != sum_t) {
        out.push_back({"overall", "total", std::to_string(*table.overall_total), std::to_string(sum_t)});
    }
    if (sums_known && table.overall_correct && *table.overall_correct != sum_c) {
        out.push_back({"overall", "correct", std::to_string(*table.overall_correct), std::to_string(sum_c)});
    }
    if (sums_known && table.overall_pct) {
        const auto computed = format_pct(sum_c, sum_t);
        if (computed != *table.overall_pct) out.push_back({"overall", "pct", *table.overall_pct, computed});
    }
    return out;
}

namespace {

json rows_to_json(const std::vector<CategoryReport>& rows, const char* key) {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({{key, r.task_type},
                       {"correct", r.correct},
                       {"total", r.total},
                       {"accuracy_pct", r.total ? json(pct_tenths(r.correct, r.total) / 10.0) : json(nullptr)}});
    }
    return out;
}

std::vector<CategoryReport> rows_from_json(const json& rows, const char* key) {
    std::vector<CategoryReport> out;
    for (const auto& r : rows) {
        out.push_back({r.at(key).get<std::string>(), r.at("correct").get<std::int64_t>(), r.at("total").get<std::int64_t>()});
    }
    return out;
}

std::vector<ComparisonRow> sorted_comparison(std::vector<ComparisonRow> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const ComparisonRow& a, const ComparisonRow& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.label < b.label;
    });
    return rows;
}

}  // namespace

json report_to_json(const BenchmarkReport& report) {
    json comparison = json::array();
    for (const auto& row : sorted_comparison(report.comparison)) {
        comparison.push_back({{"label", row.label}, {"score", row.score}});
    }
    return json{{"version", 1},
                {"prompt_version", report.prompt_version},
                {"categories", rows_to_json(report.categories, "task_type")},
                {"domains", rows_to_json(report.domains, "domain")},
                {"overall",
                 {{"correct", report.overall_correct},
                  {"total", report.overall_total},
                  {"accuracy_pct", report.overall_total
                                       ? json(pct_tenths(report.overall_correct, report.overall_total) / 10.0)
                                       : json(nullptr)}}},
                {"flagged", report.flagged},
                {"errored", report.errored},
                {"comparison", comparison}};
}

BenchmarkReport report_from_json(const json& doc) {
    try {
        BenchmarkReport report;
        report.prompt_version = doc.at("prompt_version").get<std::string>();
        report.categories = rows_from_json(doc.at("categories"), "task_type");
        report.domains = rows_from_json(doc.at("domains"), "domain");
        report.overall_correct = doc.at("overall").at("correct").get<std::int64_t>();
        report.overall_total = doc.at("overall").at("total").get<std::int64_t>();
        report.flagged = doc.value("flagged", std::int64_t{0});
        report.errored = doc.value("errored", std::int64_t{0});
        for (const auto& row : doc.at("comparison")) {
            report.comparison.push_back({row.at("label").get<std::string>(), row.at("score").get<double>()});
        }
        return report;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::schema_error, std::string("report: ") + e.what());
    }
}

std::string format_report(const BenchmarkReport& report, ReportStyle style) {
    if (style == ReportStyle::json) return report_to_json(report).dump(2) + "\n";
    std::string out = "prompt_version " + report.prompt_version + "\n";
    for (const auto& r : report.categories) {
        out += r.task_type + " " + std::to_string(r.correct) + "/" + std::to_string(r.total) + " " + r.accuracy_pct() + "\n";
    }
    out += "overall " + std::to_string(report.overall_correct) + "/" + std::to_string(report.overall_total) + " " +
           report.overall_pct() + "\n";
    if (!report.domains.empty()) {
        out += "domains\n";
        for (const auto& r : report.domains) {
            out += r.task_type + " " + std::to_string(r.correct) + "/" + std::to_string(r.total) + " " + r.accuracy_pct() +
                   "\n";
        }
    }
    if (report.flagged || report.errored) {
        out += "flagged " + std::to_string(report.flagged) + " errored " + std::to_string(report.errored) + "\n";
    }
    if (!report.comparison.empty()) {
        out += "comparison\n";
        for (const auto& row : sorted_comparison(report.comparison)) out += row.label + " " + text::fixed1(row.score) + "\n";
    }
    return out;
}

}  // namespace sceneagent::eval
