#pragma once

#include <map>
#include <string>
#include <vector>

#include "specsmith/core.hpp"
#include "specsmith/workflows.hpp"

namespace specsmith::fixtures {

struct PlantedDefect {
    std::string fixture_id;
    DefectKind category = DefectKind::Typographical;
    std::size_t section_index = 0;
    std::string excerpt; // verbatim substring of the fixture section
    std::string description;
};

// Sidecar format: {"schema":1, "defects":[{"fixture_id","category",
// "section_index","excerpt","description"}]}.
std::vector<PlantedDefect> load_planted(const std::string& path);
std::vector<PlantedDefect> parse_planted(const std::string& json_text);

// Counts planted instances per category kind; raises CoverageGap naming every
// kind with zero instances.
std::map<DefectKind, std::size_t> coverage_check(const std::vector<PlantedDefect>& planted);

struct ScoreRow {
    DefectKind category = DefectKind::Typographical;
    std::size_t planted = 0;
    std::size_t recalled = 0; // planted defects matched by some finding
    std::size_t findings = 0; // findings reported in this category
    std::size_t matched = 0;  // findings matching some planted defect
};

struct ScoreTable {
    std::vector<ScoreRow> rows;
    std::size_t planted_total = 0;
    std::size_t recalled_total = 0;
    std::size_t findings_total = 0;
    std::size_t matched_total = 0;
    double recall = 0.0;    // recalled / planted
    double precision = 0.0; // matched / findings
};

// Scores a review report against the planted defects for the same document.
// A finding matches a planted defect when category and section agree.
ScoreTable score_report(const flows::ReviewReport& report,
                        const std::vector<PlantedDefect>& planted);

std::string score_table_to_text(const ScoreTable& table);

} // namespace specsmith::fixtures
