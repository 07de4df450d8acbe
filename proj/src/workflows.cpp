#include "specsmith/workflows.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specsmith/text.hpp"

namespace specsmith::flows {

namespace {

using nlohmann::json;

constexpr const char* kReaskText = "Respond with only the JSON array.";

std::size_t category_rank(DefectKind kind) {
    const auto& cats = all_categories();
    for (std::size_t i = 0; i < cats.size(); ++i) {
        if (cats[i].kind == kind) return i;
    }
    return cats.size();
}

void sort_findings(std::vector<ReviewFinding>& findings) {
    std::sort(findings.begin(), findings.end(),
              [](const ReviewFinding& a, const ReviewFinding& b) {
                  if (a.section_index != b.section_index) return a.section_index < b.section_index;
                  auto ra = category_rank(a.category);
                  auto rb = category_rank(b.category);
                  if (ra != rb) return ra < rb;
                  return a.finding_id < b.finding_id;
              });
}

std::optional<json> try_parse_array(std::string_view candidate) {
    json parsed = json::parse(candidate, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array()) return std::nullopt;
    for (const auto& element : parsed) {
        if (!element.is_object()) return std::nullopt;
    }
    return parsed;
}

// First JSON array of objects in the content: fenced blocks are tried first,
// then bare bracket-balanced spans.
std::optional<json> find_json_array(const std::string& content) {
    size_t pos = 0;
    while ((pos = content.find("```", pos)) != std::string::npos) {
        size_t lang_end = content.find('\n', pos + 3);
        if (lang_end == std::string::npos) break;
        size_t close = content.find("```", lang_end + 1);
        if (close == std::string::npos) break;
        const std::string inner =
            text::trim(content.substr(lang_end + 1, close - lang_end - 1));
        if (auto arr = try_parse_array(inner)) return arr;
        pos = close + 3;
    }

    for (size_t start = content.find('['); start != std::string::npos;
         start = content.find('[', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (size_t k = start; k < content.size(); ++k) {
            const char c = content[k];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '[' || c == '{') {
                ++depth;
            } else if (c == ']' || c == '}') {
                --depth;
                if (depth == 0 && c == ']') {
                    if (auto arr = try_parse_array(content.substr(start, k - start + 1))) {
                        return arr;
                    }
                    break;
                }
                if (depth <= 0) break;
            }
        }
    }
    return std::nullopt;
}

std::string strip_heading_markers(std::string_view heading) {
    while (!heading.empty() && heading.front() == '#') heading.remove_prefix(1);
    while (!heading.empty() && (heading.front() == ' ' || heading.front() == '\t')) {
        heading.remove_prefix(1);
    }
    return std::string(heading);
}

struct HeadingRequirement {
    const char* label;
    std::vector<const char*> synonyms; // normalized tokens
};

const std::vector<HeadingRequirement>& heading_requirements() {
    static const std::vector<HeadingRequirement> kRequirements{
        {"Overview", {"overview", "introduction"}},
        {"Interface and Ports", {"interface", "ports", "io"}},
        {"Functional Description", {"function", "operation", "behavior"}},
        {"State Machines", {"statemachine", "fsm"}},
    };
    return kRequirements;
}

// Outline used as cross-level context when the higher document exceeds the
// budget: headings plus the first paragraph of each section.
std::string document_outline(const SpecDocument& doc) {
    std::string out;
    for (const auto& section : doc.sections) {
        std::string_view body = section.body;
        if (section.heading) {
            out += *section.heading;
            size_t line_end = body.find('\n');
            body = (line_end == std::string_view::npos) ? std::string_view{}
                                                        : body.substr(line_end + 1);
        } else {
            out += "Section " + std::to_string(section.index + 1);
        }
        out += "\n";
        // First non-blank paragraph.
        size_t start = body.find_first_not_of(" \t\r\n");
        if (start != std::string_view::npos) {
            size_t end = body.find("\n\n", start);
            std::string paragraph = text::trim(body.substr(start, end == std::string_view::npos
                                                                       ? std::string_view::npos
                                                                       : end - start));
            out += paragraph;
            out += "\n";
        }
        out += "\n";
    }
    return out;
}

std::string full_text(const SpecDocument& doc) {
    std::string out;
    for (const auto& section : doc.sections) out += section.body;
    return out;
}

json stats_to_json(const ReviewStats& stats) {
    json degraded = json::array();
    for (const auto& gap : stats.degraded) {
        degraded.push_back({{"section_index", gap.section_index}, {"error", gap.error}});
    }
    return {{"sections_reviewed", stats.sections_reviewed},
            {"requests_made", stats.requests_made},
            {"context_overflows", stats.context_overflows},
            {"dropped_elements", stats.dropped_elements},
            {"degraded", degraded}};
}

json finding_to_json(const ReviewFinding& finding) {
    json node;
    node["finding_id"] = finding.finding_id;
    node["doc_id"] = finding.doc_id;
    node["section_index"] = finding.section_index;
    node["category"] = category_info(finding.category).key;
    node["severity"] = severity_name(finding.severity);
    node["excerpt"] = finding.excerpt;
    node["explanation"] = finding.explanation;
    node["suggestion"] = finding.suggestion;
    node["provenance"] = {{"model_name", finding.provenance.model_name},
                          {"strategy", strategy_name(finding.provenance.strategy)},
                          {"prompt_digest", finding.provenance.prompt_digest}};
    if (finding.excerpt_in_section) node["excerpt_in_section"] = *finding.excerpt_in_section;
    if (finding.verdict) {
        switch (*finding.verdict) {
        case TriageVerdict::Accepted: node["verdict"] = "accepted"; break;
        case TriageVerdict::Rejected: node["verdict"] = "rejected"; break;
        case TriageVerdict::Unsure: node["verdict"] = "unsure"; break;
        }
    }
    if (finding.triage_note) node["triage_note"] = *finding.triage_note;
    return node;
}

ReviewFinding finding_from_json(const json& node) {
    ReviewFinding finding;
    finding.finding_id = node.at("finding_id").get<std::string>();
    finding.doc_id = node.at("doc_id").get<std::string>();
    finding.section_index = node.at("section_index").get<std::size_t>();
    auto kind = match_category_name(node.at("category").get<std::string>());
    if (!kind) raise(Err::ParseError, "unknown category in report finding");
    finding.category = *kind;
    finding.severity = parse_severity(node.at("severity").get<std::string>());
    finding.excerpt = node.at("excerpt").get<std::string>();
    finding.explanation = node.at("explanation").get<std::string>();
    finding.suggestion = node.at("suggestion").get<std::string>();
    const auto& prov = node.at("provenance");
    finding.provenance.model_name = prov.at("model_name").get<std::string>();
    auto strategy = parse_strategy(prov.at("strategy").get<std::string>());
    if (!strategy) raise(Err::ParseError, "unknown strategy in report finding");
    finding.provenance.strategy = *strategy;
    finding.provenance.prompt_digest = prov.at("prompt_digest").get<std::string>();
    if (node.contains("excerpt_in_section")) {
        finding.excerpt_in_section = node.at("excerpt_in_section").get<bool>();
    }
    if (node.contains("verdict")) {
        const std::string verdict = node.at("verdict").get<std::string>();
        if (verdict == "accepted") finding.verdict = TriageVerdict::Accepted;
        else if (verdict == "rejected") finding.verdict = TriageVerdict::Rejected;
        else finding.verdict = TriageVerdict::Unsure;
    }
    if (node.contains("triage_note")) {
        finding.triage_note = node.at("triage_note").get<std::string>();
    }
    return finding;
}

} // namespace

FindingParse parse_findings(const gateway::ChatMessage& response, const std::string& doc_id,
                            std::size_t section_index, SpecLevel level, DefectScope scope,
                            const Provenance& provenance) {
    FindingParse out;
    auto arr = find_json_array(response.content);
    if (!arr) return out;
    out.parsed = true;

    for (const auto& element : *arr) {
        if (!element.contains("category") || !element.at("category").is_string()) {
            ++out.dropped;
            continue;
        }
        auto kind = match_category_name(element.at("category").get<std::string>());
        if (!kind) {
            ++out.dropped;
            continue;
        }
        const DefectCategory& cat = category_info(*kind);
        if (cat.scope != scope || !cat.applies_to(level)) {
            ++out.dropped;
            continue;
        }
        std::string excerpt, explanation, suggestion;
        bool keys_ok = true;
        const std::pair<const char*, std::string*> required[] = {
            {"excerpt", &excerpt}, {"explanation", &explanation}, {"suggestion", &suggestion}};
        for (const auto& [key, target] : required) {
            if (!element.contains(key) || !element.at(key).is_string()) {
                keys_ok = false;
                break;
            }
            *target = element.at(key).get<std::string>();
        }
        if (!keys_ok) {
            ++out.dropped;
            continue;
        }
        Severity severity = Severity::Medium;
        if (element.contains("severity") && element.at("severity").is_string()) {
            severity = parse_severity(element.at("severity").get<std::string>());
        }
        out.findings.push_back(make_finding(level, doc_id, section_index, *kind, severity,
                                            std::move(excerpt), std::move(explanation),
                                            std::move(suggestion), provenance));
    }
    return out;
}

Workflows::Workflows(std::shared_ptr<gateway::Gateway> gw, prompts::PromptKit kit,
                     RunOptions options)
    : gateway_(std::move(gw)), prompts_(std::move(kit)), options_(std::move(options)) {}

gateway::Conversation Workflows::new_conversation(double temperature) const {
    gateway::Conversation conv;
    conv.params.model_name = options_.model_name;
    conv.params.temperature = temperature;
    conv.params.max_output_tokens = options_.max_output_tokens;
    return conv;
}

// Completes the conversation and parses findings, re-asking once when the
// response carries no JSON array. Raises ParseFailed after the retry.
FindingParse Workflows::complete_and_parse(gateway::Conversation& conv, const std::string& doc_id,
                                           std::size_t section_index, SpecLevel level,
                                           DefectScope scope, std::size_t& requests,
                                           bool count_requests) {
    Provenance provenance{options_.model_name,
                          scope == DefectScope::MultiFile ? ReviewStrategy::CrossLevel
                                                          : ReviewStrategy::SectionBySection,
                          gateway::request_digest(conv)};
    gateway::ChatMessage response = gateway_->complete(conv);
    if (count_requests) ++requests;
    auto parsed = parse_findings(response, doc_id, section_index, level, scope, provenance);
    if (parsed.parsed) {
        conv.messages.push_back(response);
        return parsed;
    }
    conv.messages.push_back(response);
    conv.messages.push_back({gateway::Role::User, kReaskText});
    response = gateway_->complete(conv);
    if (count_requests) ++requests;
    conv.messages.push_back(response);
    parsed = parse_findings(response, doc_id, section_index, level, scope, provenance);
    if (!parsed.parsed) {
        raise(Err::ParseFailed, "no JSON findings array after one retry");
    }
    return parsed;
}

GenerationResult Workflows::run_generation(const prompts::RenderedPrompt& init,
                                           const prompts::RenderedPrompt& request, SpecLevel level,
                                           GenerationSource source) {
    gateway::Conversation conv = new_conversation(options_.generation_temperature);
    conv.messages = init.messages;
    conv.messages.insert(conv.messages.end(), request.messages.begin(), request.messages.end());
    const std::string digest = gateway::request_digest(conv);
    gateway::ChatMessage response = gateway_->complete(conv);

    GenerationResult result;
    result.spec =
        parse_generated_spec(response.content, level, source, options_.model_name, digest);

    for (const auto& requirement_label : required_headings(level)) {
        bool found = false;
        for (const auto& req : heading_requirements()) {
            if (requirement_label != req.label) continue;
            for (const auto& section : result.spec.body_sections) {
                const std::string norm = text::normalize_token(section.heading);
                for (const char* synonym : req.synonyms) {
                    if (norm.find(synonym) != std::string::npos) {
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
        }
        if (!found) result.validation.missing_headings.push_back(requirement_label);
    }
    result.validation.skeleton_ok = result.validation.missing_headings.empty();
    return result;
}

GenerationResult Workflows::generate_from_brief(const std::string& brief, SpecLevel level) {
    if (level == SpecLevel::HAS) {
        raise(Err::UnsupportedLevel, "HAS documents are written by people, not generated");
    }
    auto init = prompts_.render_generation_init(level);
    auto request = prompts_.render_brief_request(brief);
    return run_generation(init, request, level, GenerationSource::FromBrief);
}

GenerationResult Workflows::generate_from_rtl(const std::string& rtl_source) {
    // Parse before any LLM request; NoModuleFound propagates.
    auto modules = rtl::parse_verilog_interface(rtl_source);
    const RtlModule& top = modules.front();

    auto init = prompts_.render_generation_init(SpecLevel::LAS);
    auto request = prompts_.render_rtl_request(rtl_source, top);
    GenerationResult result = run_generation(init, request, SpecLevel::LAS,
                                             GenerationSource::FromRtl);

    try {
        auto table = rtl::extract_spec_port_table(result.spec);
        result.validation.port_issues = rtl::cross_check_ports(table, top);
    } catch (const Error& e) {
        if (e.code() != Err::NoPortTable && e.code() != Err::MalformedTable) throw;
        // No usable table: every RTL port is unaccounted for.
        for (const auto& port : top.ports) {
            result.validation.port_issues.push_back(
                {rtl::IssueKind::MissingInSpec, port.name, e.what()});
        }
    }
    return result;
}

ReviewReport Workflows::review_whole_file(const SpecDocument& doc) {
    if (doc.total_tokens > options_.chunk_budget) {
        raise(Err::StrategyRequiresSplit,
              "document is " + std::to_string(doc.total_tokens) +
                  " tokens, budget is " + std::to_string(options_.chunk_budget) +
                  "; use the sections strategy");
    }

    ReviewReport report;
    report.doc_id = doc.id;
    report.strategy = ReviewStrategy::WholeFile;

    auto init = prompts_.render_review_init(doc.level);
    auto upload = prompts_.render_whole_file_review(doc);
    gateway::Conversation conv = new_conversation(options_.review_temperature);
    conv.messages = init.messages;
    conv.messages.insert(conv.messages.end(), upload.messages.begin(), upload.messages.end());

    gateway::ChatMessage summary;
    try {
        summary = gateway_->complete(conv);
    } catch (const Error& e) {
        if (e.code() == Err::ContextOverflow) {
            raise(Err::ContextOverflow,
                  "the whole document exceeded the provider's window; use the sections strategy");
        }
        throw;
    }
    // Whole-file stats count individual requests; there is only one
    // conversation here.
    ++report.stats.requests_made;
    report.summary = summary.content;
    conv.messages.push_back(summary);

    for (const auto& section : doc.sections) {
        auto detail = prompts_.render_section_detail(section);
        conv.messages.insert(conv.messages.end(), detail.messages.begin(), detail.messages.end());
        Provenance provenance{options_.model_name, ReviewStrategy::WholeFile,
                              gateway::request_digest(conv)};
        try {
            gateway::ChatMessage response = gateway_->complete(conv);
            ++report.stats.requests_made;
            auto parsed = parse_findings(response, doc.id, section.index, doc.level,
                                         DefectScope::SingleFile, provenance);
            conv.messages.push_back(response);
            if (!parsed.parsed) {
                conv.messages.push_back({gateway::Role::User, kReaskText});
                response = gateway_->complete(conv);
                ++report.stats.requests_made;
                conv.messages.push_back(response);
                parsed = parse_findings(response, doc.id, section.index, doc.level,
                                        DefectScope::SingleFile, provenance);
            }
            if (!parsed.parsed) {
                report.stats.degraded.push_back(
                    {section.index, "ParseFailed: no JSON findings array after one retry"});
                continue;
            }
            report.stats.dropped_elements += parsed.dropped;
            for (auto& finding : parsed.findings) report.findings.push_back(std::move(finding));
            ++report.stats.sections_reviewed;
        } catch (const Error& e) {
            if (e.code() == Err::ContextOverflow) {
                raise(Err::ContextOverflow,
                      "conversation exceeded the provider's window mid-review; use the "
                      "sections strategy");
            }
            report.stats.degraded.push_back({section.index, e.what()});
            // Drop the unanswered request so the conversation stays coherent.
            conv.messages.pop_back();
        }
    }

    for (auto& finding : report.findings) {
        finding.excerpt_in_section =
            finding.excerpt.empty() ||
            doc.sections[finding.section_index].body.find(finding.excerpt) != std::string::npos;
    }
    sort_findings(report.findings);
    return report;
}

ReviewReport Workflows::review_section_by_section(const SpecDocument& doc) {
    auto init = prompts_.render_review_init(doc.level);

    struct Unit {
        Section section;
        bool is_part = false;
    };
    std::vector<Unit> units;
    for (const auto& section : doc.sections) {
        if (section.token_estimate > options_.chunk_budget) {
            auto chunks = ingest::chunk_sections({section}, options_.chunk_budget);
            for (auto& chunk : chunks) units.push_back({chunk.sections.front(), true});
        } else {
            units.push_back({section, false});
        }
    }

    struct UnitResult {
        std::size_t section_index = 0;
        bool ok = false;
        bool overflow = false;
        std::string error;
        std::vector<ReviewFinding> findings;
        std::size_t dropped = 0;
        std::size_t conversations = 0;
    };

    auto review_unit = [&](const Unit& unit) -> UnitResult {
        UnitResult result;
        result.section_index = unit.section.index;
        auto run_one = [&](const Section& section) {
            gateway::Conversation conv = new_conversation(options_.review_temperature);
            conv.messages = init.messages;
            auto body = prompts_.render_section_review(section);
            conv.messages.insert(conv.messages.end(), body.messages.begin(), body.messages.end());
            ++result.conversations;
            std::size_t unused = 0;
            auto parsed = complete_and_parse(conv, doc.id, section.index, doc.level,
                                             DefectScope::SingleFile, unused, false);
            result.dropped += parsed.dropped;
            for (auto& finding : parsed.findings) result.findings.push_back(std::move(finding));
        };
        try {
            run_one(unit.section);
            result.ok = true;
        } catch (const Error& e) {
            if (e.code() == Err::ContextOverflow && !unit.is_part &&
                options_.chunk_budget / 2 >= ingest::kMinChunkBudget) {
                // Provider refused the whole section: re-chunk at half budget.
                result.overflow = true;
                bool any_ok = false;
                auto chunks =
                    ingest::chunk_sections({unit.section}, options_.chunk_budget / 2);
                for (const auto& chunk : chunks) {
                    try {
                        run_one(chunk.sections.front());
                        any_ok = true;
                    } catch (const Error& inner) {
                        result.error = inner.what();
                    }
                }
                result.ok = any_ok;
                if (!any_ok && result.error.empty()) result.error = e.what();
            } else {
                result.overflow = (e.code() == Err::ContextOverflow);
                result.error = e.what();
            }
        } catch (const std::exception& e) {
            result.error = e.what();
        }
        return result;
    };

    std::vector<UnitResult> results(units.size());
    const std::size_t window =
        std::max<std::size_t>(1, static_cast<std::size_t>(options_.parallelism));
    std::vector<std::pair<std::size_t, std::future<UnitResult>>> inflight;
    std::size_t next = 0;
    while (next < units.size() || !inflight.empty()) {
        while (next < units.size() && inflight.size() < window) {
            inflight.emplace_back(next, std::async(std::launch::async, review_unit,
                                                   std::cref(units[next])));
            ++next;
        }
        results[inflight.front().first] = inflight.front().second.get();
        inflight.erase(inflight.begin());
    }

    ReviewReport report;
    report.doc_id = doc.id;
    report.strategy = ReviewStrategy::SectionBySection;
    std::set<std::size_t> ok_sections;
    std::set<std::string> seen_ids;
    for (auto& result : results) {
        report.stats.requests_made += result.conversations;
        report.stats.dropped_elements += result.dropped;
        if (result.overflow) ++report.stats.context_overflows;
        if (!result.ok) {
            report.stats.degraded.push_back({result.section_index, result.error});
            continue;
        }
        ok_sections.insert(result.section_index);
        for (auto& finding : result.findings) {
            if (seen_ids.insert(finding.finding_id).second) {
                report.findings.push_back(std::move(finding));
            }
        }
    }
    report.stats.sections_reviewed = ok_sections.size();

    for (auto& finding : report.findings) {
        finding.excerpt_in_section =
            finding.excerpt.empty() ||
            doc.sections[finding.section_index].body.find(finding.excerpt) != std::string::npos;
    }
    sort_findings(report.findings);
    return report;
}

ReviewReport Workflows::review_cross_level(const SpecDocument& higher, const SpecDocument& lower) {
    if (level_rank(higher.level) <= level_rank(lower.level)) {
        raise(Err::LevelOrderViolation,
              std::string(level_name(higher.level)) + " does not outrank " +
                  level_name(lower.level));
    }
    const std::string context = (higher.total_tokens <= options_.chunk_budget)
                                    ? full_text(higher)
                                    : document_outline(higher);

    struct UnitResult {
        std::size_t section_index = 0;
        bool ok = false;
        std::string error;
        std::vector<ReviewFinding> findings;
        std::size_t dropped = 0;
        std::size_t conversations = 0;
    };

    auto review_section = [&](const Section& section) -> UnitResult {
        UnitResult result;
        result.section_index = section.index;
        try {
            gateway::Conversation conv = new_conversation(options_.review_temperature);
            auto prompt = prompts_.render_cross_level(context, higher.level, section, lower.level);
            conv.messages = prompt.messages;
            ++result.conversations;
            std::size_t unused = 0;
            auto parsed = complete_and_parse(conv, lower.id, section.index, lower.level,
                                             DefectScope::MultiFile, unused, false);
            result.dropped = parsed.dropped;
            result.findings = std::move(parsed.findings);
            result.ok = true;
        } catch (const Error& e) {
            result.error = e.what();
        } catch (const std::exception& e) {
            result.error = e.what();
        }
        return result;
    };

    std::vector<UnitResult> results(lower.sections.size());
    const std::size_t window =
        std::max<std::size_t>(1, static_cast<std::size_t>(options_.parallelism));
    std::vector<std::pair<std::size_t, std::future<UnitResult>>> inflight;
    std::size_t next = 0;
    while (next < lower.sections.size() || !inflight.empty()) {
        while (next < lower.sections.size() && inflight.size() < window) {
            inflight.emplace_back(next, std::async(std::launch::async, review_section,
                                                   std::cref(lower.sections[next])));
            ++next;
        }
        results[inflight.front().first] = inflight.front().second.get();
        inflight.erase(inflight.begin());
    }

    ReviewReport report;
    report.doc_id = lower.id;
    report.strategy = ReviewStrategy::CrossLevel;
    std::set<std::size_t> ok_sections;
    std::set<std::string> seen_ids;
    for (auto& result : results) {
        report.stats.requests_made += result.conversations;
        report.stats.dropped_elements += result.dropped;
        if (!result.ok) {
            report.stats.degraded.push_back({result.section_index, result.error});
            continue;
        }
        ok_sections.insert(result.section_index);
        for (auto& finding : result.findings) {
            if (seen_ids.insert(finding.finding_id).second) {
                report.findings.push_back(std::move(finding));
            }
        }
    }
    report.stats.sections_reviewed = ok_sections.size();

    for (auto& finding : report.findings) {
        finding.excerpt_in_section =
            finding.excerpt.empty() ||
            lower.sections[finding.section_index].body.find(finding.excerpt) !=
                std::string::npos;
    }
    sort_findings(report.findings);
    return report;
}

ReviewReport apply_triage(const ReviewReport& report,
                          const std::vector<TriageAnnotation>& annotations) {
    std::set<std::string> known;
    for (const auto& finding : report.findings) known.insert(finding.finding_id);
    for (const auto& annotation : annotations) {
        if (!known.count(annotation.finding_id)) {
            raise(Err::UnknownFindingId,
                  "annotation references unknown finding " + annotation.finding_id);
        }
    }

    ReviewReport out;
    out.doc_id = report.doc_id;
    out.strategy = report.strategy;
    out.summary = report.summary;
    out.stats = report.stats;
    for (const auto& finding : report.findings) {
        const TriageAnnotation* annotation = nullptr;
        for (const auto& a : annotations) {
            if (a.finding_id == finding.finding_id) {
                annotation = &a;
                break;
            }
        }
        if (annotation && annotation->verdict == TriageVerdict::Rejected) continue;
        ReviewFinding kept = finding;
        if (annotation) {
            kept.verdict = annotation->verdict;
            kept.triage_note = annotation->note;
        }
        out.findings.push_back(std::move(kept));
    }
    return out;
}

std::string report_to_json(const ReviewReport& report) {
    json root;
    root["schema"] = 1;
    root["doc_id"] = report.doc_id;
    root["strategy"] = strategy_name(report.strategy);
    root["summary"] = report.summary ? json(*report.summary) : json(nullptr);
    root["stats"] = stats_to_json(report.stats);
    json findings = json::array();
    for (const auto& finding : report.findings) findings.push_back(finding_to_json(finding));
    root["findings"] = findings;
    return root.dump(2) + "\n";
}

ReviewReport report_from_json(const std::string& json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded() || !root.is_object()) {
        raise(Err::ParseError, "report is not valid JSON");
    }
    if (root.value("schema", 0) != 1) raise(Err::ParseError, "unsupported report schema");

    ReviewReport report;
    report.doc_id = root.at("doc_id").get<std::string>();
    auto strategy = parse_strategy(root.at("strategy").get<std::string>());
    if (!strategy) raise(Err::ParseError, "unknown strategy in report");
    report.strategy = *strategy;
    if (root.contains("summary") && !root.at("summary").is_null()) {
        report.summary = root.at("summary").get<std::string>();
    }
    const auto& stats = root.at("stats");
    report.stats.sections_reviewed = stats.at("sections_reviewed").get<std::size_t>();
    report.stats.requests_made = stats.at("requests_made").get<std::size_t>();
    report.stats.context_overflows = stats.at("context_overflows").get<std::size_t>();
    report.stats.dropped_elements = stats.value("dropped_elements", std::size_t{0});
    for (const auto& gap : stats.value("degraded", json::array())) {
        report.stats.degraded.push_back({gap.at("section_index").get<std::size_t>(),
                                         gap.at("error").get<std::string>()});
    }
    for (const auto& node : root.at("findings")) {
        report.findings.push_back(finding_from_json(node));
    }
    return report;
}

std::string report_to_markdown(const ReviewReport& report) {
    std::ostringstream out;
    out << "# Review report: " << report.doc_id << " (" << strategy_name(report.strategy)
        << ")\n\n";
    if (report.summary) {
        out << "## Summary\n\n" << *report.summary << "\n\n";
    }
    out << "## Findings (" << report.findings.size() << ")\n\n";
    if (report.findings.empty()) {
        out << "No findings.\n\n";
    }
    std::size_t last_section = static_cast<std::size_t>(-1);
    for (const auto& finding : report.findings) {
        if (finding.section_index != last_section) {
            out << "### Section " << (finding.section_index + 1) << "\n\n";
            last_section = finding.section_index;
        }
        out << "- **" << category_info(finding.category).display_name << "** ("
            << severity_name(finding.severity) << ") `" << finding.finding_id << "`";
        if (finding.verdict) {
            out << " [" << (*finding.verdict == TriageVerdict::Accepted
                                ? "accepted"
                                : *finding.verdict == TriageVerdict::Rejected ? "rejected"
                                                                              : "unsure")
                << "]";
        }
        out << "\n";
        if (!finding.excerpt.empty()) out << "  - excerpt: \"" << finding.excerpt << "\"\n";
        if (finding.excerpt_in_section && !*finding.excerpt_in_section) {
            out << "  - warning: excerpt not found in this section's text\n";
        }
        out << "  - explanation: " << finding.explanation << "\n";
        out << "  - suggestion: " << finding.suggestion << "\n";
    }
    out << "\n## Stats\n\n";
    out << "- sections reviewed: " << report.stats.sections_reviewed << "\n";
    out << "- requests made: " << report.stats.requests_made << "\n";
    out << "- context overflows: " << report.stats.context_overflows << "\n";
    out << "- dropped elements: " << report.stats.dropped_elements << "\n";
    if (!report.stats.degraded.empty()) {
        out << "- degraded sections:\n";
        for (const auto& gap : report.stats.degraded) {
            out << "  - section " << (gap.section_index + 1) << ": " << gap.error << "\n";
        }
    }
    return out.str();
}

std::vector<TriageAnnotation> parse_annotations(const std::string& json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded() || !root.is_array()) {
        raise(Err::ParseError, "annotations must be a JSON array");
    }
    std::vector<TriageAnnotation> annotations;
    for (const auto& node : root) {
        TriageAnnotation annotation;
        annotation.finding_id = node.at("finding_id").get<std::string>();
        const std::string verdict = node.at("verdict").get<std::string>();
        if (verdict == "accepted") annotation.verdict = TriageVerdict::Accepted;
        else if (verdict == "rejected") annotation.verdict = TriageVerdict::Rejected;
        else if (verdict == "unsure") annotation.verdict = TriageVerdict::Unsure;
        else raise(Err::ParseError, "unknown verdict \"" + verdict + "\"");
        if (node.contains("note")) annotation.note = node.at("note").get<std::string>();
        annotations.push_back(std::move(annotation));
    }
    return annotations;
}

std::string generated_spec_to_markdown(const GeneratedSpec& spec) {
    std::string out = "# " + spec.title + "\n\n";
    for (const auto& section : spec.body_sections) {
        if (!section.heading.empty()) out += "## " + section.heading + "\n\n";
        out += section.body;
        if (!section.body.empty() && section.body.back() != '\n') out += "\n";
        out += "\n";
    }
    return out;
}

std::string validation_to_json(const GenerationValidation& validation) {
    json root;
    root["schema"] = 1;
    root["skeleton_ok"] = validation.skeleton_ok;
    root["missing_headings"] = validation.missing_headings;
    json issues = json::array();
    for (const auto& issue : validation.port_issues) {
        issues.push_back({{"kind", rtl::issue_kind_name(issue.kind)},
                          {"port", issue.port_name},
                          {"detail", issue.detail}});
    }
    root["port_issues"] = issues;
    return root.dump(2) + "\n";
}

GeneratedSpec parse_generated_spec(const std::string& content, SpecLevel level,
                                   GenerationSource source, const std::string& model_name,
                                   const std::string& prompt_digest) {
    GeneratedSpec spec;
    spec.level = level;
    spec.source = source;
    spec.provenance.model_name = model_name;
    spec.provenance.prompt_digest = prompt_digest;
    spec.title = (level == SpecLevel::LAS) ? "Generated LAS" : "Generated MAS";

    if (text::trim(content).empty()) {
        spec.body_sections.push_back({"", ""});
        return spec;
    }

    ingest::SplitPolicy policy;
    policy.heading_styles = {ingest::HeadingStyle::MarkdownAtx,
                             ingest::HeadingStyle::NumberedHeading};
    auto sections = ingest::split_sections(content, policy);

    for (size_t i = 0; i < sections.size(); ++i) {
        const auto& section = sections[i];
        std::string heading;
        std::string body = section.body;
        if (section.heading) {
            heading = strip_heading_markers(*section.heading);
            size_t line_end = body.find('\n');
            body = (line_end == std::string::npos) ? "" : body.substr(line_end + 1);
        }
        body = text::trim(body);
        // A level-1 heading that is not a skeleton section becomes the title.
        if (i == 0 && section.heading && section.heading->rfind("# ", 0) == 0) {
            bool skeleton_like = false;
            const std::string norm = text::normalize_token(heading);
            for (const auto& req : heading_requirements()) {
                for (const char* synonym : req.synonyms) {
                    if (norm.find(synonym) != std::string::npos) skeleton_like = true;
                }
            }
            if (!skeleton_like) {
                spec.title = heading;
                if (body.empty() && sections.size() > 1) continue;
            }
        }
        spec.body_sections.push_back({heading, body});
    }
    if (spec.body_sections.empty()) spec.body_sections.push_back({"", ""});
    return spec;
}

std::vector<std::string> required_headings(SpecLevel level) {
    std::vector<std::string> out{"Overview", "Interface and Ports", "Functional Description"};
    if (level == SpecLevel::LAS) out.push_back("State Machines");
    return out;
}

} // namespace specsmith::flows
