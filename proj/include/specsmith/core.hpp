#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "specsmith/errors.hpp"

namespace specsmith {

// Abstraction levels of an architecture specification. Documents that cannot
// be classified are rejected at ingest; there is deliberately no Unknown.
enum class SpecLevel { HAS, MAS, LAS };

enum class ProductType { CPU, SoC, Accelerator, BusNetwork, Arithmetic, Crypto };

enum class DefectKind {
    Typographical,
    InconsistencyWithinFile,
    IncompleteOrUnclear,
    CombinationalLoop,
    UninitializedRegister,
    MicroArchImprovement,
    ArchImprovement,
    CrossLevelInconsistency,
};

enum class DefectScope { SingleFile, MultiFile };

enum class Severity { Low, Medium, High };

enum class ReviewStrategy { WholeFile, SectionBySection, CrossLevel };

struct DefectCategory {
    DefectKind kind;
    DefectScope scope;
    // Which document levels the category can be reported against.
    bool applies_has;
    bool applies_mas;
    bool applies_las;
    // Human-facing name used in prompts and reports.
    const char* display_name;
    // One-line definition fed to the review prompt.
    const char* definition;
    // Stable snake_case key used in JSON files.
    const char* key;

    bool applies_to(SpecLevel level) const {
        switch (level) {
        case SpecLevel::HAS: return applies_has;
        case SpecLevel::MAS: return applies_mas;
        case SpecLevel::LAS: return applies_las;
        }
        return false;
    }
};

// All eight categories in declaration order.
const std::vector<DefectCategory>& all_categories();

const DefectCategory& category_info(DefectKind kind);

// Categories applicable to `level` with the given scope, in declaration order.
std::vector<DefectCategory> applicable_categories(SpecLevel level, DefectScope scope);

// Maps a free-form category name (model output, JSON key, display name) onto
// a kind. Returns nullopt when nothing matches.
std::optional<DefectKind> match_category_name(std::string_view name);

struct Section {
    std::size_t index = 0;
    std::optional<std::string> heading; // raw heading line, absent for preamble
    std::string body;                   // source slice, heading line included
    std::size_t token_estimate = 0;
    std::pair<std::size_t, std::size_t> char_span{0, 0}; // byte offsets [start, end)
};

struct SpecDocument {
    std::string id; // slug, [a-z0-9-]+
    std::string title;
    SpecLevel level = SpecLevel::LAS;
    ProductType product_type = ProductType::CPU;
    std::string source_path;
    std::vector<Section> sections;
    std::size_t total_tokens = 0;
};

enum class TriageVerdict { Accepted, Rejected, Unsure };

struct Provenance {
    std::string model_name;
    ReviewStrategy strategy = ReviewStrategy::SectionBySection;
    std::string prompt_digest;
};

struct ReviewFinding {
    std::string finding_id;
    std::string doc_id;
    std::size_t section_index = 0;
    DefectKind category = DefectKind::Typographical;
    Severity severity = Severity::Medium;
    std::string excerpt;
    std::string explanation;
    std::string suggestion;
    Provenance provenance;
    // Set by the section-by-section flow: whether the excerpt is a verbatim
    // substring of its own section body. Absent for other flows.
    std::optional<bool> excerpt_in_section;
    std::optional<TriageVerdict> verdict;
    std::optional<std::string> triage_note;
};

// Validating constructor: rejects categories inapplicable to the document
// level (Err::CategoryNotApplicable) and computes the finding id.
ReviewFinding make_finding(SpecLevel doc_level, std::string doc_id, std::size_t section_index,
                           DefectKind category, Severity severity, std::string excerpt,
                           std::string explanation, std::string suggestion, Provenance provenance);

// 16 lowercase hex chars, stable across processes and platforms.
std::string finding_id(std::string_view doc_id, std::size_t section_index,
                       std::string_view category, std::string_view excerpt);

enum class PortDirection { In, Out, InOut };

// Either a resolved bit count or the raw range text when parameter-dependent.
using BitWidth = std::variant<std::uint32_t, std::string>;

struct RtlParameter {
    std::string name;
    std::optional<std::string> default_value;
};

struct RtlPort {
    std::string name;
    PortDirection direction = PortDirection::In;
    BitWidth width_bits = std::uint32_t{1};
};

struct RtlModule {
    std::string name;
    std::vector<RtlParameter> parameters;
    std::vector<RtlPort> ports;
};

enum class GenerationSource { FromBrief, FromRtl };

struct GeneratedSection {
    std::string heading;
    std::string body;
};

struct GeneratedSpec {
    std::string title;
    SpecLevel level = SpecLevel::LAS; // never HAS
    std::vector<GeneratedSection> body_sections;
    GenerationSource source = GenerationSource::FromBrief;
    struct {
        std::string model_name;
        std::string prompt_digest;
    } provenance;
};

// Enum <-> string helpers shared by manifest, reports and the CLI.
const char* level_name(SpecLevel level);
std::optional<SpecLevel> parse_level(std::string_view text);
const char* product_type_name(ProductType type);
std::optional<ProductType> parse_product_type(std::string_view text);
const char* severity_name(Severity severity);
Severity parse_severity(std::string_view text); // unknown -> Medium
const char* strategy_name(ReviewStrategy strategy);
std::optional<ReviewStrategy> parse_strategy(std::string_view text);

// HAS outranks MAS outranks LAS.
int level_rank(SpecLevel level);

} // namespace specsmith
