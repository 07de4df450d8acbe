#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "specsmith/catalog.hpp"
#include "specsmith/core.hpp"
#include "specsmith/docstore.hpp"
#include "specsmith/errors.hpp"
#include "specsmith/fixtures.hpp"
#include "specsmith/gateway.hpp"
#include "specsmith/ingest.hpp"
#include "specsmith/promptkit.hpp"
#include "specsmith/workflows.hpp"

namespace {

namespace fs = std::filesystem;
using namespace specsmith;

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return (value && *value) ? value : fallback;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Err::IoError, "cannot open " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(Err::IoError, "cannot write " + path);
    out << content;
    if (!out.good()) raise(Err::IoError, "write failed for " + path);
}

struct GatewayOpts {
    std::string backend = "replay";
    std::string cassette_dir;
    std::string rules_file;
    std::string model;
    std::string api_base;
    std::string api_key;
    bool record = false;
    std::size_t budget = ingest::kDefaultChunkBudget;
    int parallelism = 4;
    std::string templates_dir = "templates";
    std::string output_dir = ".";
};

void add_gateway_options(CLI::App* cmd, GatewayOpts& opts) {
    cmd->add_option("--backend", opts.backend, "Backend: replay, mock or live")
        ->check(CLI::IsMember({"replay", "mock", "live"}))
        ->capture_default_str();
    cmd->add_option("--cassette-dir", opts.cassette_dir,
                    "Directory holding cassette files (replay/record)");
    cmd->add_option("--rules", opts.rules_file, "Mock backend rule file");
    cmd->add_option("--model", opts.model, "Model name (default: $SPECSMITH_MODEL or gpt-4)");
    cmd->add_flag("--record", opts.record,
                  "Record every interaction to the cassette for later replay");
    cmd->add_option("--budget", opts.budget, "Chunk token budget")->capture_default_str();
    cmd->add_option("--parallelism", opts.parallelism, "Concurrent review conversations")
        ->capture_default_str();
    cmd->add_option("--templates-dir", opts.templates_dir, "Prompt template directory")
        ->capture_default_str();
    cmd->add_option("--output-dir", opts.output_dir, "Where to write results")
        ->capture_default_str();
}

void resolve_env(GatewayOpts& opts) {
    if (opts.model.empty()) opts.model = env_or("SPECSMITH_MODEL", "gpt-4");
    opts.api_base = env_or("SPECSMITH_API_BASE", "https://api.openai.com/v1");
    opts.api_key = env_or("SPECSMITH_API_KEY", "");
}

std::shared_ptr<gateway::Gateway> make_backend(const GatewayOpts& opts,
                                               const std::string& cassette_name) {
    const std::string cassette_path =
        opts.cassette_dir.empty() ? "" : (fs::path(opts.cassette_dir) / cassette_name).string();

    std::shared_ptr<gateway::Gateway> backend;
    if (opts.backend == "mock") {
        if (opts.rules_file.empty()) raise(Err::ConfigError, "mock backend requires --rules");
        backend = gateway::load_mock_gateway(opts.rules_file);
    } else if (opts.backend == "replay") {
        if (opts.cassette_dir.empty()) {
            raise(Err::ConfigError, "replay backend requires --cassette-dir");
        }
        backend = std::make_shared<gateway::ReplayGateway>(gateway::load_cassette(cassette_path));
    } else { // live
        if (opts.api_key.empty()) {
            raise(Err::ConfigError, "live backend requires SPECSMITH_API_KEY");
        }
        gateway::LiveConfig config;
        config.api_base = opts.api_base;
        config.api_key = opts.api_key;
        config.parallelism = opts.parallelism;
        backend = std::make_shared<gateway::LiveGateway>(config);
    }
    if (opts.record) {
        if (opts.cassette_dir.empty()) raise(Err::ConfigError, "--record requires --cassette-dir");
        fs::create_directories(opts.cassette_dir);
        backend = std::make_shared<gateway::RecordingGateway>(backend, cassette_path);
    }
    return backend;
}

flows::Workflows make_workflows(const GatewayOpts& opts, std::shared_ptr<gateway::Gateway> gw) {
    flows::RunOptions run;
    run.model_name = opts.model;
    run.chunk_budget = opts.budget;
    run.parallelism = opts.parallelism;
    return flows::Workflows(std::move(gw), prompts::PromptKit(prompts::TemplateStore::load(
                                               opts.templates_dir)),
                            run);
}

int cmd_catalog_validate(const std::string& manifest_path) {
    auto entries = catalog::load_manifest(manifest_path);
    auto stats = catalog::manifest_stats(entries);
    std::cout << "entries: " << entries.size() << "\n";
    std::cout << "by level:\n";
    for (const auto& [level, count] : stats.by_level) {
        std::cout << "  " << level_name(level) << ": " << count << "\n";
    }
    std::cout << "by product type:\n";
    for (const auto& [type, count] : stats.by_type) {
        std::cout << "  " << product_type_name(type) << ": " << count << "\n";
    }
    std::cout << "manifest OK\n";
    return 0;
}

int cmd_ingest(const std::string& file, const std::string& id, const std::string& level_text,
               const std::string& type_text, std::string title, std::size_t min_section_chars,
               const std::string& output_dir) {
    auto level = parse_level(level_text);
    if (!level) raise(Err::UsageError, "unknown level \"" + level_text + "\" (HAS|MAS|LAS)");
    auto type = parse_product_type(type_text);
    if (!type) raise(Err::UsageError, "unknown product type \"" + type_text + "\"");
    if (title.empty()) title = id;

    const std::string source = read_file(file);
    ingest::SplitPolicy policy;
    policy.min_section_chars = min_section_chars;
    SpecDocument doc = ingest::build_document(id, title, *level, *type, file, source, policy);
    const std::string dir = docstore::save_document(doc, output_dir);
    std::cout << "ingested " << doc.id << ": " << doc.sections.size() << " sections, "
              << doc.total_tokens << " tokens -> " << dir << "\n";
    return 0;
}

int cmd_review(const std::string& doc_dir, const std::string& strategy_text,
               const std::string& higher_dir, GatewayOpts& opts) {
    resolve_env(opts);
    auto strategy = parse_strategy(strategy_text);
    if (!strategy) {
        raise(Err::UsageError, "unknown strategy \"" + strategy_text + "\" (whole|sections|cross)");
    }
    if (*strategy == ReviewStrategy::CrossLevel && higher_dir.empty()) {
        raise(Err::UsageError, "cross strategy requires --higher <doc_dir>");
    }

    SpecDocument doc = docstore::load_document(doc_dir);
    const std::string cassette_name =
        doc.id + "." + strategy_name(*strategy) + ".cassette.json";
    auto flows_runner = make_workflows(opts, make_backend(opts, cassette_name));

    flows::ReviewReport report;
    switch (*strategy) {
    case ReviewStrategy::WholeFile:
        report = flows_runner.review_whole_file(doc);
        break;
    case ReviewStrategy::SectionBySection:
        report = flows_runner.review_section_by_section(doc);
        break;
    case ReviewStrategy::CrossLevel: {
        SpecDocument higher = docstore::load_document(higher_dir);
        report = flows_runner.review_cross_level(higher, doc);
        break;
    }
    }

    fs::create_directories(opts.output_dir);
    const std::string stem =
        (fs::path(opts.output_dir) / (doc.id + "." + strategy_name(*strategy))).string();
    write_file(stem + ".report.json", flows::report_to_json(report));
    write_file(stem + ".report.md", flows::report_to_markdown(report));
    std::cout << "report: " << stem << ".report.json (" << report.findings.size()
              << " findings, " << report.stats.sections_reviewed << " sections reviewed)\n";
    if (!report.stats.degraded.empty()) {
        std::cout << "degraded sections: " << report.stats.degraded.size() << "\n";
    }
    return 0;
}

int cmd_generate(const std::string& brief, const std::string& rtl_file,
                 const std::string& level_text, GatewayOpts& opts) {
    resolve_env(opts);
    auto backend = make_backend(opts, "generate.cassette.json");
    auto flows_runner = make_workflows(opts, backend);

    flows::GenerationResult result;
    if (!rtl_file.empty()) {
        result = flows_runner.generate_from_rtl(read_file(rtl_file));
    } else {
        auto level = parse_level(level_text);
        if (!level) raise(Err::UsageError, "unknown level \"" + level_text + "\" (MAS|LAS)");
        result = flows_runner.generate_from_brief(brief, *level);
    }

    fs::create_directories(opts.output_dir);
    const std::string stem = (fs::path(opts.output_dir) / "generated_spec").string();
    write_file(stem + ".md", flows::generated_spec_to_markdown(result.spec));
    write_file(stem + ".validation.json", flows::validation_to_json(result.validation));
    std::cout << "spec: " << stem << ".md (skeleton "
              << (result.validation.skeleton_ok ? "ok" : "incomplete") << ", "
              << result.validation.port_issues.size() << " port issues)\n";
    return 0;
}

int cmd_triage(const std::string& report_path, const std::string& annotations_path,
               const std::string& output_dir) {
    auto report = flows::report_from_json(read_file(report_path));
    auto annotations = flows::parse_annotations(read_file(annotations_path));
    const std::size_t before = report.findings.size();
    auto filtered = flows::apply_triage(report, annotations);

    fs::create_directories(output_dir);
    const std::string stem =
        (fs::path(output_dir) /
         (filtered.doc_id + "." + strategy_name(filtered.strategy) + ".triaged"))
            .string();
    write_file(stem + ".report.json", flows::report_to_json(filtered));
    write_file(stem + ".report.md", flows::report_to_markdown(filtered));
    std::cout << "retained " << filtered.findings.size() << " of " << before << " findings -> "
              << stem << ".report.json\n";
    return 0;
}

int cmd_score(const std::string& report_path, const std::string& planted_path) {
    auto report = flows::report_from_json(read_file(report_path));
    auto planted = fixtures::load_planted(planted_path);
    std::cout << score_table_to_text(fixtures::score_report(report, planted));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"specsmith - generate and review VLSI architecture specifications with an LLM"};
    app.require_subcommand(1);

    // catalog-validate
    std::string manifest_path;
    auto* validate = app.add_subcommand("catalog-validate",
                                        "Validate a corpus manifest and print its statistics");
    validate->add_option("manifest", manifest_path, "Manifest JSON file")->required();

    // ingest
    std::string ingest_file, ingest_id, ingest_level, ingest_type, ingest_title;
    std::size_t ingest_min_chars = 0;
    std::string ingest_output = ".";
    auto* ingest_cmd =
        app.add_subcommand("ingest", "Split a specification file into a document directory");
    ingest_cmd->add_option("file", ingest_file, "UTF-8 text or markdown file")->required();
    ingest_cmd->add_option("--id", ingest_id, "Document id ([a-z0-9-]+)")->required();
    ingest_cmd->add_option("--level", ingest_level, "HAS, MAS or LAS")->required();
    ingest_cmd->add_option("--type", ingest_type, "Product type (CPU, SoC, ...)")->required();
    ingest_cmd->add_option("--title", ingest_title, "Document title (defaults to id)");
    ingest_cmd->add_option("--min-section-chars", ingest_min_chars,
                           "Fold sections shorter than this into a neighbour");
    ingest_cmd->add_option("--output-dir", ingest_output, "Parent directory for the document")
        ->capture_default_str();

    // review
    std::string review_doc_dir, review_strategy = "sections", review_higher;
    GatewayOpts review_opts;
    auto* review_cmd = app.add_subcommand("review", "Review an ingested document for defects");
    review_cmd->add_option("doc_dir", review_doc_dir, "Ingested document directory")->required();
    review_cmd->add_option("--strategy", review_strategy, "whole, sections or cross")
        ->capture_default_str();
    review_cmd->add_option("--higher", review_higher,
                           "Higher-level document directory (cross strategy)");
    add_gateway_options(review_cmd, review_opts);

    // generate
    std::string gen_brief, gen_rtl, gen_level = "las";
    GatewayOpts gen_opts;
    auto* generate_cmd =
        app.add_subcommand("generate", "Generate a specification from a brief or RTL");
    auto* brief_opt = generate_cmd->add_option("--brief", gen_brief, "Designer brief text");
    auto* rtl_opt = generate_cmd->add_option("--rtl", gen_rtl, "Verilog source file");
    brief_opt->excludes(rtl_opt);
    rtl_opt->excludes(brief_opt);
    generate_cmd->add_option("--level", gen_level, "MAS or LAS (brief mode)")
        ->capture_default_str();
    add_gateway_options(generate_cmd, gen_opts);

    // triage
    std::string triage_report, triage_annotations, triage_output = ".";
    auto* triage_cmd =
        app.add_subcommand("triage", "Apply human accept/reject annotations to a report");
    triage_cmd->add_option("report", triage_report, "Report JSON file")->required();
    triage_cmd->add_option("annotations", triage_annotations, "Annotations JSON file")
        ->required();
    triage_cmd->add_option("--output-dir", triage_output, "Where to write the filtered report")
        ->capture_default_str();

    // score
    std::string score_report_path, score_planted_path;
    auto* score_cmd = app.add_subcommand(
        "score", "Score a review report against a planted-defect sidecar");
    score_cmd->add_option("report", score_report_path, "Report JSON file")->required();
    score_cmd->add_option("planted", score_planted_path, "Planted-defect sidecar JSON")
        ->required();

    try {
        app.parse(argc, argv);

        if (validate->parsed()) return cmd_catalog_validate(manifest_path);
        if (ingest_cmd->parsed()) {
            return cmd_ingest(ingest_file, ingest_id, ingest_level, ingest_type, ingest_title,
                              ingest_min_chars, ingest_output);
        }
        if (review_cmd->parsed()) {
            return cmd_review(review_doc_dir, review_strategy, review_higher, review_opts);
        }
        if (generate_cmd->parsed()) {
            if (gen_brief.empty() && gen_rtl.empty()) {
                raise(Err::UsageError, "generate requires --brief or --rtl");
            }
            return cmd_generate(gen_brief, gen_rtl, gen_level, gen_opts);
        }
        if (triage_cmd->parsed()) {
            return cmd_triage(triage_report, triage_annotations, triage_output);
        }
        if (score_cmd->parsed()) return cmd_score(score_report_path, score_planted_path);
        return 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1; // usage errors are domain-class failures
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return is_io_or_config(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
