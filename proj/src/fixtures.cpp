#include "specsmith/fixtures.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace specsmith::fixtures {

namespace {

using nlohmann::json;

} // namespace

std::vector<PlantedDefect> parse_planted(const std::string& json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        raise(Err::ParseError, "planted-defect sidecar is not valid JSON");
    }
    if (root.value("schema", 0) != 1) raise(Err::ParseError, "unsupported sidecar schema");

    std::vector<PlantedDefect> planted;
    for (const auto& node : root.at("defects")) {
        PlantedDefect defect;
        defect.fixture_id = node.at("fixture_id").get<std::string>();
        auto kind = match_category_name(node.at("category").get<std::string>());
        if (!kind) {
            raise(Err::ParseError,
                  "unknown category \"" + node.at("category").get<std::string>() + "\"");
        }
        defect.category = *kind;
        defect.section_index = node.at("section_index").get<std::size_t>();
        defect.excerpt = node.at("excerpt").get<std::string>();
        defect.description = node.value("description", std::string{});
        planted.push_back(std::move(defect));
    }
    return planted;
}

std::vector<PlantedDefect> load_planted(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Err::IoError, "cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_planted(buffer.str());
}

std::map<DefectKind, std::size_t> coverage_check(const std::vector<PlantedDefect>& planted) {
    std::map<DefectKind, std::size_t> counts;
    for (const auto& cat : all_categories()) counts[cat.kind] = 0;
    for (const auto& defect : planted) ++counts[defect.category];

    std::string missing;
    for (const auto& cat : all_categories()) {
        if (counts[cat.kind] == 0) {
            if (!missing.empty()) missing += ", ";
            missing += cat.display_name;
        }
    }
    if (!missing.empty()) {
        raise(Err::CoverageGap, "no planted instance of: " + missing);
    }
    return counts;
}

ScoreTable score_report(const flows::ReviewReport& report,
                        const std::vector<PlantedDefect>& planted) {
    std::vector<PlantedDefect> relevant;
    for (const auto& defect : planted) {
        if (defect.fixture_id == report.doc_id) relevant.push_back(defect);
    }

    ScoreTable table;
    for (const auto& cat : all_categories()) {
        ScoreRow row;
        row.category = cat.kind;
        for (const auto& defect : relevant) {
            if (defect.category != cat.kind) continue;
            ++row.planted;
            bool hit = false;
            for (const auto& finding : report.findings) {
                if (finding.category == cat.kind &&
                    finding.section_index == defect.section_index) {
                    hit = true;
                    break;
                }
            }
            if (hit) ++row.recalled;
        }
        for (const auto& finding : report.findings) {
            if (finding.category != cat.kind) continue;
            ++row.findings;
            for (const auto& defect : relevant) {
                if (defect.category == cat.kind &&
                    defect.section_index == finding.section_index) {
                    ++row.matched;
                    break;
                }
            }
        }
        if (row.planted > 0 || row.findings > 0) table.rows.push_back(row);
        table.planted_total += row.planted;
        table.recalled_total += row.recalled;
        table.findings_total += row.findings;
        table.matched_total += row.matched;
    }
    table.recall = table.planted_total ? static_cast<double>(table.recalled_total) /
                                             static_cast<double>(table.planted_total)
                                       : 0.0;
    table.precision = table.findings_total ? static_cast<double>(table.matched_total) /
                                                 static_cast<double>(table.findings_total)
                                           : 0.0;
    return table;
}

std::string score_table_to_text(const ScoreTable& table) {
    std::ostringstream out;
    out << "category                                      planted  recalled  findings  matched\n";
    for (const auto& row : table.rows) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-45s %7zu %9zu %9zu %8zu\n",
                      category_info(row.category).display_name, row.planted, row.recalled,
                      row.findings, row.matched);
        out << line;
    }
    char totals[160];
    std::snprintf(totals, sizeof(totals), "%-45s %7zu %9zu %9zu %8zu\n", "TOTAL",
                  table.planted_total, table.recalled_total, table.findings_total,
                  table.matched_total);
    out << totals;
    char rates[96];
    std::snprintf(rates, sizeof(rates), "recall: %.2f  precision: %.2f\n", table.recall,
                  table.precision);
    out << rates;
    return out.str();
}

} // namespace specsmith::fixtures
