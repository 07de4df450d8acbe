#include "specsmith/core.hpp"

#include "specsmith/text.hpp"

namespace specsmith {

const std::vector<DefectCategory>& all_categories() {
    static const std::vector<DefectCategory> kCategories{
        {DefectKind::Typographical, DefectScope::SingleFile, true, true, true,
         "Typographical Error",
         "spelling, grammar, or formatting mistakes in the text",
         "typographical"},
        {DefectKind::InconsistencyWithinFile, DefectScope::SingleFile, true, true, true,
         "Inconsistence or Contradiction Error",
         "two statements in this document describe the same thing differently or contradict each other",
         "inconsistency_within_file"},
        {DefectKind::IncompleteOrUnclear, DefectScope::SingleFile, true, true, true,
         "Incomplete or Unclear Error",
         "a concept is missing essential information or is written so it can be read in more than one way",
         "incomplete_or_unclear"},
        {DefectKind::CombinationalLoop, DefectScope::SingleFile, false, false, true,
         "Combinational Loops Error",
         "described port or signal connections form a cycle through purely combinational logic",
         "combinational_loop"},
        {DefectKind::UninitializedRegister, DefectScope::SingleFile, false, false, true,
         "Uninitialized Register Value Error",
         "a register or state element is read before any reset or assignment gives it a value",
         "uninitialized_register"},
        {DefectKind::MicroArchImprovement, DefectScope::SingleFile, false, false, true,
         "Improvement for Micro-architectural Design",
         "an opportunity to refine the described microarchitecture beyond fixing outright mistakes",
         "microarch_improvement"},
        {DefectKind::ArchImprovement, DefectScope::SingleFile, false, true, false,
         "Improvement for Architectural Design",
         "an opportunity to refine the chip-level architecture beyond fixing outright mistakes",
         "arch_improvement"},
        {DefectKind::CrossLevelInconsistency, DefectScope::MultiFile, true, true, true,
         "Inconsistence or Contradiction Error (Across Various Levels)",
         "a statement contradicts content established in a higher-level specification document",
         "cross_level_inconsistency"},
    };
    return kCategories;
}

const DefectCategory& category_info(DefectKind kind) {
    for (const auto& cat : all_categories()) {
        if (cat.kind == kind) return cat;
    }
    // Unreachable: all kinds are in the table.
    return all_categories().front();
}

std::vector<DefectCategory> applicable_categories(SpecLevel level, DefectScope scope) {
    std::vector<DefectCategory> out;
    for (const auto& cat : all_categories()) {
        if (cat.scope == scope && cat.applies_to(level)) out.push_back(cat);
    }
    return out;
}

std::optional<DefectKind> match_category_name(std::string_view name) {
    const std::string norm = text::normalize_token(name);
    if (norm.empty()) return std::nullopt;

    // Exact matches on key or display name first.
    for (const auto& cat : all_categories()) {
        if (norm == text::normalize_token(cat.key) ||
            norm == text::normalize_token(cat.display_name)) {
            return cat.kind;
        }
    }

    auto contains = [&norm](const char* needle) {
        return norm.find(needle) != std::string::npos;
    };

    if (contains("crosslevel") || contains("acrossvariouslevels") || contains("acrosslevels") ||
        contains("levelspanning")) {
        return DefectKind::CrossLevelInconsistency;
    }
    if (contains("combinational") || contains("loop")) return DefectKind::CombinationalLoop;
    if (contains("uninitialized") || contains("uninitialised")) {
        return DefectKind::UninitializedRegister;
    }
    if (contains("microarch") && contains("improvement")) return DefectKind::MicroArchImprovement;
    if (contains("improvement") && (contains("architectur") || contains("arch"))) {
        return DefectKind::ArchImprovement;
    }
    if (contains("typo") || contains("spelling") || contains("grammar")) {
        return DefectKind::Typographical;
    }
    if (contains("inconsist") || contains("contradict")) {
        return DefectKind::InconsistencyWithinFile;
    }
    if (contains("incomplete") || contains("unclear") || contains("ambiguous")) {
        return DefectKind::IncompleteOrUnclear;
    }
    return std::nullopt;
}

ReviewFinding make_finding(SpecLevel doc_level, std::string doc_id, std::size_t section_index,
                           DefectKind category, Severity severity, std::string excerpt,
                           std::string explanation, std::string suggestion, Provenance provenance) {
    const DefectCategory& cat = category_info(category);
    if (!cat.applies_to(doc_level)) {
        raise(Err::CategoryNotApplicable,
              std::string(cat.display_name) + " does not apply to " + level_name(doc_level) +
                  " documents");
    }
    ReviewFinding finding;
    finding.finding_id = finding_id(doc_id, section_index, cat.key, excerpt);
    finding.doc_id = std::move(doc_id);
    finding.section_index = section_index;
    finding.category = category;
    finding.severity = severity;
    finding.excerpt = std::move(excerpt);
    finding.explanation = std::move(explanation);
    finding.suggestion = std::move(suggestion);
    finding.provenance = std::move(provenance);
    return finding;
}

std::string finding_id(std::string_view doc_id, std::size_t section_index,
                       std::string_view category, std::string_view excerpt) {
    std::string canonical;
    canonical.reserve(doc_id.size() + category.size() + excerpt.size() + 24);
    canonical.append(doc_id);
    canonical.push_back('\x1f');
    canonical.append(std::to_string(section_index));
    canonical.push_back('\x1f');
    canonical.append(category);
    canonical.push_back('\x1f');
    canonical.append(excerpt);
    return text::fnv1a_hex(canonical);
}

const char* level_name(SpecLevel level) {
    switch (level) {
    case SpecLevel::HAS: return "HAS";
    case SpecLevel::MAS: return "MAS";
    case SpecLevel::LAS: return "LAS";
    }
    return "LAS";
}

std::optional<SpecLevel> parse_level(std::string_view word) {
    const std::string upper = text::to_lower(word);
    if (upper == "has") return SpecLevel::HAS;
    if (upper == "mas") return SpecLevel::MAS;
    if (upper == "las") return SpecLevel::LAS;
    return std::nullopt;
}

const char* product_type_name(ProductType type) {
    switch (type) {
    case ProductType::CPU: return "CPU";
    case ProductType::SoC: return "SoC";
    case ProductType::Accelerator: return "Accelerator";
    case ProductType::BusNetwork: return "BusNetwork";
    case ProductType::Arithmetic: return "Arithmetic";
    case ProductType::Crypto: return "Crypto";
    }
    return "CPU";
}

std::optional<ProductType> parse_product_type(std::string_view word) {
    const std::string norm = text::normalize_token(word);
    if (norm == "cpu") return ProductType::CPU;
    if (norm == "soc") return ProductType::SoC;
    if (norm == "accelerator") return ProductType::Accelerator;
    if (norm == "busnetwork" || norm == "bus" || norm == "busandnetwork") {
        return ProductType::BusNetwork;
    }
    if (norm == "arithmetic") return ProductType::Arithmetic;
    if (norm == "crypto") return ProductType::Crypto;
    return std::nullopt;
}

const char* severity_name(Severity severity) {
    switch (severity) {
    case Severity::Low: return "low";
    case Severity::Medium: return "medium";
    case Severity::High: return "high";
    }
    return "medium";
}

Severity parse_severity(std::string_view word) {
    const std::string norm = text::normalize_token(word);
    if (norm == "low" || norm == "minor") return Severity::Low;
    if (norm == "high" || norm == "critical" || norm == "major") return Severity::High;
    return Severity::Medium;
}

const char* strategy_name(ReviewStrategy strategy) {
    switch (strategy) {
    case ReviewStrategy::WholeFile: return "whole";
    case ReviewStrategy::SectionBySection: return "sections";
    case ReviewStrategy::CrossLevel: return "cross";
    }
    return "sections";
}

std::optional<ReviewStrategy> parse_strategy(std::string_view word) {
    const std::string norm = text::normalize_token(word);
    if (norm == "whole" || norm == "wholefile") return ReviewStrategy::WholeFile;
    if (norm == "sections" || norm == "sectionbysection") return ReviewStrategy::SectionBySection;
    if (norm == "cross" || norm == "crosslevel") return ReviewStrategy::CrossLevel;
    return std::nullopt;
}

int level_rank(SpecLevel level) {
    switch (level) {
    case SpecLevel::HAS: return 2;
    case SpecLevel::MAS: return 1;
    case SpecLevel::LAS: return 0;
    }
    return 0;
}

} // namespace specsmith
