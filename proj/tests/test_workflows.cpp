#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specsmith/docstore.hpp"
#include "specsmith/gateway.hpp"
#include "specsmith/ingest.hpp"
#include "specsmith/workflows.hpp"

using namespace specsmith;
using namespace specsmith::flows;

namespace {

const std::string kRoot = SPECSMITH_REPO_ROOT;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

SpecDocument las_fixture() {
    return ingest::build_document("uart-ctrl-las", "UART Transmit Controller", SpecLevel::LAS,
                                  ProductType::SoC, "fixtures/docs/uart-ctrl-las.md",
                                  read_file(kRoot + "/fixtures/docs/uart-ctrl-las.md"),
                                  ingest::SplitPolicy{});
}

SpecDocument mas_fixture() {
    return ingest::build_document("uart-node-mas", "UART Node", SpecLevel::MAS, ProductType::SoC,
                                  "fixtures/docs/uart-node-mas.md",
                                  read_file(kRoot + "/fixtures/docs/uart-node-mas.md"),
                                  ingest::SplitPolicy{});
}

prompts::PromptKit kit() {
    return prompts::PromptKit(prompts::TemplateStore::load(kRoot + "/templates"));
}

std::shared_ptr<gateway::Gateway> review_mock() {
    return gateway::load_mock_gateway(kRoot + "/fixtures/mock/review_rules.json");
}

std::shared_ptr<gateway::Gateway> generate_mock() {
    return gateway::load_mock_gateway(kRoot + "/fixtures/mock/generate_rules.json");
}

// Counts completes; used to prove precondition failures never hit the backend.
class CountingGateway : public gateway::Gateway {
public:
    explicit CountingGateway(std::shared_ptr<gateway::Gateway> inner)
        : inner_(std::move(inner)) {}
    gateway::ChatMessage complete(const gateway::Conversation& conv) override {
        ++calls;
        return inner_->complete(conv);
    }
    std::string backend_name() const override { return "counting"; }
    std::atomic<int> calls{0};

private:
    std::shared_ptr<gateway::Gateway> inner_;
};

Workflows make_flows(std::shared_ptr<gateway::Gateway> gw, std::size_t budget = 6000) {
    RunOptions options;
    options.chunk_budget = budget;
    options.parallelism = 4;
    return Workflows(std::move(gw), kit(), options);
}

Provenance test_prov() {
    return {"gpt-4", ReviewStrategy::SectionBySection, "0123456789abcdef"};
}

} // namespace

TEST_CASE("parse_findings reads a bare JSON array of objects") {
    gateway::ChatMessage response{gateway::Role::Assistant, R"(Here are my findings:
[
  {"category": "Typographical Error", "severity": "low", "excerpt": "teh",
   "explanation": "misspelling", "suggestion": "the"},
  {"category": "Incomplete or Unclear Error", "severity": "high", "excerpt": "it is fast",
   "explanation": "no metric", "suggestion": "quantify"}
]
Hope this helps!)"};
    auto parsed = parse_findings(response, "doc", 2, SpecLevel::LAS, DefectScope::SingleFile,
                                 test_prov());
    CHECK(parsed.parsed);
    REQUIRE(parsed.findings.size() == 2);
    CHECK(parsed.dropped == 0);
    CHECK(parsed.findings[0].category == DefectKind::Typographical);
    CHECK(parsed.findings[0].severity == Severity::Low);
    CHECK(parsed.findings[0].section_index == 2);
    CHECK(parsed.findings[1].category == DefectKind::IncompleteOrUnclear);
}

TEST_CASE("parse_findings prefers fenced blocks and skips non-object arrays") {
    gateway::ChatMessage response{gateway::Role::Assistant,
                                  "Scores were [1, 2, 3] overall.\n```json\n"
                                  "[{\"category\": \"Typo\", \"excerpt\": \"x\","
                                  "\"explanation\": \"e\", \"suggestion\": \"s\"}]\n```"};
    auto parsed = parse_findings(response, "doc", 0, SpecLevel::HAS, DefectScope::SingleFile,
                                 test_prov());
    CHECK(parsed.parsed);
    REQUIRE(parsed.findings.size() == 1);
    // "Typo" normalizes to the typographical category; severity defaults.
    CHECK(parsed.findings[0].category == DefectKind::Typographical);
    CHECK(parsed.findings[0].severity == Severity::Medium);
}

TEST_CASE("parse_findings drops inapplicable and malformed elements, counting them") {
    gateway::ChatMessage response{gateway::Role::Assistant, R"([
      {"category": "Combinational Loops Error", "excerpt": "x", "explanation": "e",
       "suggestion": "s"},
      {"category": "Totally Made Up", "excerpt": "x", "explanation": "e", "suggestion": "s"},
      {"category": "Typographical Error", "explanation": "missing excerpt", "suggestion": "s"},
      {"category": "Typographical Error", "excerpt": "ok", "explanation": "e", "suggestion": "s"}
    ])"};
    // On a MAS document the combinational-loop element must not survive.
    auto parsed = parse_findings(response, "doc", 0, SpecLevel::MAS, DefectScope::SingleFile,
                                 test_prov());
    CHECK(parsed.parsed);
    REQUIRE(parsed.findings.size() == 1);
    CHECK(parsed.findings[0].category == DefectKind::Typographical);
    CHECK(parsed.dropped == 3);

    // Cross-level scope keeps only the multi-file category.
    gateway::ChatMessage cross{gateway::Role::Assistant, R"json([
      {"category": "Inconsistence or Contradiction Error", "excerpt": "a", "explanation": "e",
       "suggestion": "s"},
      {"category": "Inconsistence or Contradiction Error (Across Various Levels)",
       "excerpt": "a", "explanation": "e", "suggestion": "s"}
    ])json"};
    auto cross_parsed = parse_findings(cross, "doc", 0, SpecLevel::LAS, DefectScope::MultiFile,
                                       test_prov());
    REQUIRE(cross_parsed.findings.size() == 1);
    CHECK(cross_parsed.findings[0].category == DefectKind::CrossLevelInconsistency);
    CHECK(cross_parsed.dropped == 1);
}

TEST_CASE("parse_findings reports prose as unparsed") {
    gateway::ChatMessage prose{gateway::Role::Assistant, "no issues found"};
    auto parsed = parse_findings(prose, "doc", 0, SpecLevel::LAS, DefectScope::SingleFile,
                                 test_prov());
    CHECK(!parsed.parsed);
    CHECK(parsed.findings.empty());
}

TEST_CASE("generate_from_brief: well-formed mock satisfies the skeleton") {
    auto flows = make_flows(generate_mock());
    auto result = flows.generate_from_brief(
        "a perpetual calendar circuit that tracks date and weekday", SpecLevel::LAS);
    CHECK(result.validation.skeleton_ok);
    CHECK(result.validation.missing_headings.empty());
    CHECK(result.validation.port_issues.empty());
    CHECK(result.spec.level == SpecLevel::LAS);
    CHECK(result.spec.source == GenerationSource::FromBrief);
    CHECK(result.spec.title == "Perpetual Calendar Controller");
    REQUIRE(result.spec.body_sections.size() == 4);
    CHECK(result.spec.body_sections[0].heading == "1. Overview");
    CHECK(!result.spec.provenance.prompt_digest.empty());
}

TEST_CASE("generate_from_brief: prose response degrades to one section") {
    auto flows = make_flows(generate_mock());
    auto result = flows.generate_from_brief("reply in prose only please", SpecLevel::MAS);
    CHECK(!result.validation.skeleton_ok);
    REQUIRE(result.spec.body_sections.size() == 1);
    CHECK(result.spec.body_sections[0].heading.empty());
    CHECK(result.validation.missing_headings.size() == 3);
}

TEST_CASE("generate_from_brief: HAS is rejected before any request") {
    auto counting = std::make_shared<CountingGateway>(generate_mock());
    auto flows = make_flows(counting);
    try {
        flows.generate_from_brief("anything", SpecLevel::HAS);
        FAIL("expected UnsupportedLevel");
    } catch (const Error& e) {
        CHECK(e.code() == Err::UnsupportedLevel);
    }
    CHECK(counting->calls == 0);
}

TEST_CASE("generate_from_rtl: consistent mock spec yields no port issues") {
    auto flows = make_flows(generate_mock());
    auto result = flows.generate_from_rtl(read_file(kRoot + "/fixtures/rtl/adder.v"));
    CHECK(result.spec.level == SpecLevel::LAS);
    CHECK(result.spec.source == GenerationSource::FromRtl);
    CHECK(result.validation.skeleton_ok);
    CHECK(result.validation.port_issues.empty());
}

TEST_CASE("generate_from_rtl: spec omitting a port is caught by the cross-check") {
    // In-code mock whose table lacks the "sum" output.
    std::vector<gateway::MockRule> rules{{{"module adder"}, R"(# Adder

## 1. Overview
x

## 2. Interface and Ports

| Name | Direction | Width |
|------|-----------|-------|
| a    | input     | 4     |
| b    | input     | 4     |

## 3. Functional Description
x

## 4. State Machines
none
)"}};
    auto flows = make_flows(
        std::make_shared<gateway::MockGateway>(rules, std::nullopt));
    auto result = flows.generate_from_rtl(read_file(kRoot + "/fixtures/rtl/adder.v"));
    REQUIRE(result.validation.port_issues.size() == 1);
    CHECK(result.validation.port_issues[0].kind == rtl::IssueKind::MissingInSpec);
    CHECK(result.validation.port_issues[0].port_name == "sum");
}

TEST_CASE("generate_from_rtl: unparseable RTL never reaches the gateway") {
    auto counting = std::make_shared<CountingGateway>(generate_mock());
    auto flows = make_flows(counting);
    try {
        flows.generate_from_rtl("this is not verilog");
        FAIL("expected NoModuleFound");
    } catch (const Error& e) {
        CHECK(e.code() == Err::NoModuleFound);
    }
    CHECK(counting->calls == 0);
}

TEST_CASE("review_section_by_section covers every section with planted findings") {
    auto flows = make_flows(review_mock());
    SpecDocument doc = las_fixture();
    REQUIRE(doc.sections.size() == 5);

    auto report = flows.review_section_by_section(doc);
    CHECK(report.strategy == ReviewStrategy::SectionBySection);
    CHECK(report.stats.sections_reviewed == 5);
    CHECK(report.stats.requests_made == 5);
    CHECK(report.stats.degraded.empty());
    REQUIRE(report.findings.size() == 6);

    // Sorted by (section, category order); every excerpt attributes cleanly.
    CHECK(report.findings[0].category == DefectKind::Typographical);
    CHECK(report.findings[0].section_index == 0);
    for (const auto& finding : report.findings) {
        REQUIRE(finding.excerpt_in_section.has_value());
        CHECK(*finding.excerpt_in_section);
        CHECK(finding.provenance.strategy == ReviewStrategy::SectionBySection);
    }
    for (size_t i = 1; i < report.findings.size(); ++i) {
        CHECK(report.findings[i - 1].section_index <= report.findings[i].section_index);
    }
}

TEST_CASE("review_whole_file runs one conversation with summary then details") {
    auto flows = make_flows(review_mock());
    SpecDocument doc = las_fixture();
    auto report = flows.review_whole_file(doc);
    CHECK(report.strategy == ReviewStrategy::WholeFile);
    REQUIRE(report.summary.has_value());
    CHECK(report.summary->find("well structured") != std::string::npos);
    CHECK(report.stats.sections_reviewed == 5);
    CHECK(report.stats.requests_made == 6); // 1 summary + 5 details
    CHECK(report.findings.size() == 6);
    for (const auto& finding : report.findings) {
        CHECK(finding.provenance.strategy == ReviewStrategy::WholeFile);
    }
}

TEST_CASE("review_whole_file rejects oversized documents before any request") {
    auto counting = std::make_shared<CountingGateway>(review_mock());
    auto flows = make_flows(counting, /*budget=*/64);
    try {
        flows.review_whole_file(las_fixture());
        FAIL("expected StrategyRequiresSplit");
    } catch (const Error& e) {
        CHECK(e.code() == Err::StrategyRequiresSplit);
        CHECK(std::string(e.what()).find("sections") != std::string::npos);
    }
    CHECK(counting->calls == 0);
}

TEST_CASE("replay determinism: identical cassettes give byte-identical reports") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "specsmith-replay-test";
    fs::create_directories(dir);
    const std::string cassette_path = (dir / "sections.cassette.json").string();
    fs::remove(cassette_path);

    SpecDocument doc = las_fixture();
    {
        auto recorder =
            std::make_shared<gateway::RecordingGateway>(review_mock(), cassette_path);
        make_flows(recorder).review_section_by_section(doc);
    }
    auto replay1 = std::make_shared<gateway::ReplayGateway>(gateway::load_cassette(cassette_path));
    auto replay2 = std::make_shared<gateway::ReplayGateway>(gateway::load_cassette(cassette_path));
    auto report1 = make_flows(replay1).review_section_by_section(doc);
    auto report2 = make_flows(replay2).review_section_by_section(doc);
    CHECK(report_to_json(report1) == report_to_json(report2));
    fs::remove_all(dir);
}

TEST_CASE("error isolation: a missing cassette entry degrades only its section") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "specsmith-isolation-test";
    fs::create_directories(dir);
    const std::string cassette_path = (dir / "sections.cassette.json").string();
    fs::remove(cassette_path);

    SpecDocument doc = las_fixture();
    {
        auto recorder =
            std::make_shared<gateway::RecordingGateway>(review_mock(), cassette_path);
        make_flows(recorder).review_section_by_section(doc);
    }

    auto cassette = gateway::load_cassette(cassette_path);
    auto before = cassette.interactions.size();
    cassette.interactions.erase(
        std::remove_if(cassette.interactions.begin(), cassette.interactions.end(),
                       [](const gateway::Interaction& interaction) {
                           return interaction.request.messages.back().content.find(
                                      "Section 3 (Functional Description)") !=
                                  std::string::npos;
                       }),
        cassette.interactions.end());
    REQUIRE(cassette.interactions.size() == before - 1);

    auto report = make_flows(std::make_shared<gateway::ReplayGateway>(cassette))
                      .review_section_by_section(doc);
    CHECK(report.stats.sections_reviewed == 4);
    REQUIRE(report.stats.degraded.size() == 1);
    CHECK(report.stats.degraded[0].section_index == 2);
    CHECK(report.stats.degraded[0].error.find("CassetteMiss") != std::string::npos);
    // Findings from the other sections survive.
    CHECK(report.findings.size() == 4);
    for (const auto& finding : report.findings) CHECK(finding.section_index != 2);
    fs::remove_all(dir);
}

TEST_CASE("review_cross_level finds the planted contradiction and nothing else") {
    auto flows = make_flows(review_mock());
    SpecDocument higher = mas_fixture();
    SpecDocument lower = las_fixture();

    auto report = flows.review_cross_level(higher, lower);
    CHECK(report.strategy == ReviewStrategy::CrossLevel);
    CHECK(report.doc_id == "uart-ctrl-las");
    REQUIRE(report.findings.size() == 1);
    CHECK(report.findings[0].category == DefectKind::CrossLevelInconsistency);
    CHECK(report.findings[0].section_index == 4);
    CHECK(report.findings[0].excerpt == "The FIFO depth is 8 entries.");
    CHECK(report.stats.sections_reviewed == lower.sections.size());
}

TEST_CASE("cross-level replay reproduces the committed golden report") {
    auto cassette = gateway::load_cassette(
        kRoot + "/fixtures/cassettes/uart-ctrl-las.cross.cassette.json");
    auto flows = make_flows(std::make_shared<gateway::ReplayGateway>(cassette));
    auto report = flows.review_cross_level(mas_fixture(), las_fixture());
    CHECK(report_to_json(report) ==
          read_file(kRoot + "/fixtures/goldens/reports/uart-ctrl-las.cross.report.json"));
}

TEST_CASE("review_cross_level enforces the level order") {
    auto counting = std::make_shared<CountingGateway>(review_mock());
    auto flows = make_flows(counting);
    try {
        flows.review_cross_level(las_fixture(), mas_fixture());
        FAIL("expected LevelOrderViolation");
    } catch (const Error& e) {
        CHECK(e.code() == Err::LevelOrderViolation);
    }
    try {
        flows.review_cross_level(las_fixture(), las_fixture());
        FAIL("expected LevelOrderViolation");
    } catch (const Error& e) {
        CHECK(e.code() == Err::LevelOrderViolation);
    }
    CHECK(counting->calls == 0);
}

TEST_CASE("re-ask protocol: one retry then ParseFailed degrades the section") {
    // Mock answers prose for section 1 twice; the re-ask needle must match
    // the bare re-ask message only, not the section template's own reminder.
    std::vector<gateway::MockRule> rules{
        {{"Section 1 (Overview)"}, "I see no problems here."},
        {{"only the JSON array."}, "still prose, sorry"},
    };
    auto mock = std::make_shared<gateway::MockGateway>(rules, std::string("[]"));
    auto flows = make_flows(mock);
    auto report = flows.review_section_by_section(las_fixture());
    CHECK(report.stats.sections_reviewed == 4);
    REQUIRE(report.stats.degraded.size() == 1);
    CHECK(report.stats.degraded[0].section_index == 0);
    CHECK(report.stats.degraded[0].error.find("ParseFailed") != std::string::npos);

    // With a compliant re-ask answer the section recovers.
    std::vector<gateway::MockRule> recovering{
        {{"Section 1 (Overview)"}, "I see no problems here."},
        {{"only the JSON array."}, "[]"},
    };
    auto flows2 =
        make_flows(std::make_shared<gateway::MockGateway>(recovering, std::string("[]")));
    auto report2 = flows2.review_section_by_section(las_fixture());
    CHECK(report2.stats.degraded.empty());
    CHECK(report2.stats.sections_reviewed == 5);
}

TEST_CASE("apply_triage filters rejected findings and keeps order") {
    auto flows = make_flows(review_mock());
    auto report = flows.review_section_by_section(las_fixture());
    REQUIRE(report.findings.size() == 6);

    SUBCASE("empty annotation set is the identity") {
        auto same = apply_triage(report, {});
        CHECK(report_to_json(same) == report_to_json(report));
    }
    SUBCASE("rejecting everything empties the report") {
        std::vector<TriageAnnotation> all;
        for (const auto& finding : report.findings) {
            all.push_back({finding.finding_id, TriageVerdict::Rejected, std::nullopt});
        }
        auto none = apply_triage(report, all);
        CHECK(none.findings.empty());
        CHECK(none.stats.requests_made == report.stats.requests_made);
    }
    SUBCASE("one rejection among many preserves the rest in order") {
        std::vector<TriageAnnotation> some{
            {report.findings[2].finding_id, TriageVerdict::Rejected, std::nullopt},
            {report.findings[0].finding_id, TriageVerdict::Accepted, std::string("real")},
        };
        auto filtered = apply_triage(report, some);
        REQUIRE(filtered.findings.size() == 5);
        CHECK(filtered.findings[0].verdict == TriageVerdict::Accepted);
        CHECK(filtered.findings[0].triage_note == "real");
        for (size_t i = 1; i < filtered.findings.size(); ++i) {
            CHECK(!filtered.findings[i].verdict.has_value());
        }
    }
    SUBCASE("unknown finding ids are rejected") {
        try {
            apply_triage(report, {{"ffffffffffffffff", TriageVerdict::Accepted, std::nullopt}});
            FAIL("expected UnknownFindingId");
        } catch (const Error& e) {
            CHECK(e.code() == Err::UnknownFindingId);
        }
    }
}

TEST_CASE("report JSON round-trips and annotations parse") {
    auto flows = make_flows(review_mock());
    auto report = flows.review_whole_file(las_fixture());
    auto reloaded = report_from_json(report_to_json(report));
    CHECK(report_to_json(reloaded) == report_to_json(report));

    auto annotations = parse_annotations(
        R"([{"finding_id": "abc", "verdict": "accepted", "note": "n"},
            {"finding_id": "def", "verdict": "unsure"}])");
    REQUIRE(annotations.size() == 2);
    CHECK(annotations[0].verdict == TriageVerdict::Accepted);
    CHECK(annotations[0].note == "n");
    CHECK(!annotations[1].note.has_value());
    CHECK_THROWS_AS(parse_annotations(R"([{"finding_id": "x", "verdict": "maybe"}])"), Error);
    CHECK_THROWS_AS(parse_annotations("{}"), Error);

    const std::string markdown = report_to_markdown(report);
    CHECK(markdown.find("# Review report: uart-ctrl-las (whole)") != std::string::npos);
    CHECK(markdown.find("## Summary") != std::string::npos);
    CHECK(markdown.find("Combinational") != std::string::npos);
}

TEST_CASE("generated spec markdown and validation JSON are well-formed") {
    auto flows = make_flows(generate_mock());
    auto result = flows.generate_from_rtl(read_file(kRoot + "/fixtures/rtl/adder.v"));
    const std::string markdown = generated_spec_to_markdown(result.spec);
    CHECK(markdown.find("# 4-Bit Adder with Carry Out") == 0);
    CHECK(markdown.find("## 2. Interface and Ports") != std::string::npos);

    const std::string validation = validation_to_json(result.validation);
    CHECK(validation.find("\"skeleton_ok\": true") != std::string::npos);
    CHECK(validation.find("\"port_issues\": []") != std::string::npos);
}
