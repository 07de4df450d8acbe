#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "specsmith/core.hpp"
#include "specsmith/gateway.hpp"
#include "specsmith/ingest.hpp"
#include "specsmith/promptkit.hpp"
#include "specsmith/rtl.hpp"

namespace specsmith::flows {

struct DegradedSection {
    std::size_t section_index = 0;
    std::string error;
};

struct ReviewStats {
    std::size_t sections_reviewed = 0;
    std::size_t requests_made = 0;
    std::size_t context_overflows = 0;
    std::size_t dropped_elements = 0;
    std::vector<DegradedSection> degraded;
};

struct ReviewReport {
    std::string doc_id;
    ReviewStrategy strategy = ReviewStrategy::SectionBySection;
    std::optional<std::string> summary;
    std::vector<ReviewFinding> findings; // sorted by (section_index, category, finding_id)
    ReviewStats stats;
};

struct GenerationValidation {
    bool skeleton_ok = false;
    std::vector<std::string> missing_headings;
    std::vector<rtl::ConsistencyIssue> port_issues; // FromRtl only
};

struct GenerationResult {
    GeneratedSpec spec;
    GenerationValidation validation;
};

struct TriageAnnotation {
    std::string finding_id;
    TriageVerdict verdict = TriageVerdict::Unsure;
    std::optional<std::string> note;
};

struct RunOptions {
    std::string model_name = "gpt-4";
    std::size_t chunk_budget = ingest::kDefaultChunkBudget;
    int parallelism = 4;
    double review_temperature = 0.0;
    double generation_temperature = 0.7;
    int max_output_tokens = 4096;
};

struct FindingParse {
    std::vector<ReviewFinding> findings;
    std::size_t dropped = 0; // elements that failed key/category/applicability checks
    bool parsed = false;     // false when no JSON array was found at all
};

// Locates the first JSON array of finding objects in a model response and
// converts the elements. Unknown category names are mapped to the nearest
// taxonomy kind; elements whose category does not apply to (level, scope)
// are dropped and counted.
FindingParse parse_findings(const gateway::ChatMessage& response, const std::string& doc_id,
                            std::size_t section_index, SpecLevel level, DefectScope scope,
                            const Provenance& provenance);

class Workflows {
public:
    Workflows(std::shared_ptr<gateway::Gateway> gw, prompts::PromptKit kit, RunOptions options);

    // Brief -> MAS/LAS specification. HAS is rejected before any request.
    GenerationResult generate_from_brief(const std::string& brief, SpecLevel level);

    // RTL -> LAS specification with a deterministic port cross-check.
    GenerationResult generate_from_rtl(const std::string& rtl_source);

    // One conversation: init, whole document + summary request, then one
    // detail request per section. Documents over the chunk budget are
    // rejected with StrategyRequiresSplit before any request.
    ReviewReport review_whole_file(const SpecDocument& doc);

    // Independent two-message conversations per section; oversized sections
    // are chunked first; failures degrade single sections, never the run.
    ReviewReport review_section_by_section(const SpecDocument& doc);

    // Reviews each lower-document section against the higher document's
    // content; only cross-level contradictions are kept.
    ReviewReport review_cross_level(const SpecDocument& higher, const SpecDocument& lower);

private:
    std::shared_ptr<gateway::Gateway> gateway_;
    prompts::PromptKit prompts_;
    RunOptions options_;

    gateway::Conversation new_conversation(double temperature) const;
    FindingParse complete_and_parse(gateway::Conversation& conv, const std::string& doc_id,
                                    std::size_t section_index, SpecLevel level, DefectScope scope,
                                    std::size_t& requests, bool count_requests);
    GenerationResult run_generation(const prompts::RenderedPrompt& init,
                                    const prompts::RenderedPrompt& request, SpecLevel level,
                                    GenerationSource source);
};

// Post-hoc human triage: Rejected findings are removed, Accepted/Unsure are
// retained with the verdict attached. Unknown ids raise UnknownFindingId.
ReviewReport apply_triage(const ReviewReport& report,
                          const std::vector<TriageAnnotation>& annotations);

// ---- file formats ------------------------------------------------------------

std::string report_to_json(const ReviewReport& report);
ReviewReport report_from_json(const std::string& json_text);
std::string report_to_markdown(const ReviewReport& report);

std::vector<TriageAnnotation> parse_annotations(const std::string& json_text);

std::string generated_spec_to_markdown(const GeneratedSpec& spec);
std::string validation_to_json(const GenerationValidation& validation);

// Markdown response -> GeneratedSpec (exposed for tests).
GeneratedSpec parse_generated_spec(const std::string& content, SpecLevel level,
                                   GenerationSource source, const std::string& model_name,
                                   const std::string& prompt_digest);

// Skeleton headings required of a generated spec at `level`.
std::vector<std::string> required_headings(SpecLevel level);

} // namespace specsmith::flows
