#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "specsmith/core.hpp"
#include "specsmith/gateway.hpp"

namespace specsmith::prompts {

struct PromptTemplate {
    std::string template_id;
    std::set<std::string> required_slots;
    std::string body; // text with {slot} placeholders
    std::string digest;
};

// Loads one UTF-8 text file per template id from a directory and checks each
// file's placeholders against the slot set the code expects.
class TemplateStore {
public:
    static TemplateStore load(const std::string& dir);

    const PromptTemplate& get(const std::string& template_id) const;

    std::string render(const std::string& template_id,
                       const std::map<std::string, std::string>& slots) const;

    std::map<std::string, std::string> digests() const;

    // template ids the store requires, with their slot sets
    static const std::map<std::string, std::set<std::string>>& expected_templates();

private:
    std::map<std::string, PromptTemplate> templates_;
};

struct RenderedPrompt {
    std::string template_id;
    std::vector<gateway::ChatMessage> messages;
    std::string digest;
};

// "Section 3 (Functional Description)"; 1-based, heading markers stripped.
std::string section_label(const Section& section);

class PromptKit {
public:
    explicit PromptKit(TemplateStore store) : store_(std::move(store)) {}

    // System message fixing the architect role, the target level and the
    // response skeleton. HAS is rejected: those documents stay human-authored.
    RenderedPrompt render_generation_init(SpecLevel level) const;

    RenderedPrompt render_brief_request(const std::string& brief) const;

    RenderedPrompt render_rtl_request(const std::string& rtl_source, const RtlModule& module) const;

    // System message enumerating every single-file category applicable to the
    // level and pinning the JSON findings format.
    RenderedPrompt render_review_init(SpecLevel level) const;

    RenderedPrompt render_section_review(const Section& section) const;

    RenderedPrompt render_cross_level(const std::string& higher_text, SpecLevel higher_level,
                                      const Section& lower_section, SpecLevel lower_level) const;

    // Whole-file flow: full document plus the summary request, then one
    // detail request per section.
    RenderedPrompt render_whole_file_review(const SpecDocument& doc) const;
    RenderedPrompt render_section_detail(const Section& section) const;

    const TemplateStore& store() const { return store_; }

private:
    TemplateStore store_;

    RenderedPrompt make_prompt(const std::string& template_id, gateway::Role role,
                               const std::map<std::string, std::string>& slots) const;
};

// Long-form names used inside prompts ("lowest-level architecture
// specification (LAS)").
std::string level_long_name(SpecLevel level);

} // namespace specsmith::prompts
