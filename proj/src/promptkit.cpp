#include "specsmith/promptkit.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "specsmith/text.hpp"

namespace specsmith::prompts {

namespace {

// Scans `{name}` placeholders where name is [a-z_]+.
std::set<std::string> scan_slots(std::string_view body) {
    std::set<std::string> slots;
    size_t pos = 0;
    while ((pos = body.find('{', pos)) != std::string_view::npos) {
        size_t end = pos + 1;
        while (end < body.size() &&
               (std::islower(static_cast<unsigned char>(body[end])) || body[end] == '_')) {
            ++end;
        }
        if (end < body.size() && body[end] == '}' && end > pos + 1) {
            slots.insert(std::string(body.substr(pos + 1, end - pos - 1)));
            pos = end + 1;
        } else {
            ++pos;
        }
    }
    return slots;
}

std::string level_definition(SpecLevel level) {
    switch (level) {
    case SpecLevel::MAS:
        return "A middle-level architecture specification outlines the overall architecture of "
               "a single product: its major blocks, how they interconnect, and their primary "
               "parameters.";
    case SpecLevel::LAS:
        return "A lowest-level architecture specification describes the microarchitecture of a "
               "single product in implementation detail: its ports, internal signals, "
               "pipelines, and state machines.";
    case SpecLevel::HAS:
        return "A highest-level architecture specification establishes standards that apply "
               "across a whole range of products.";
    }
    return "";
}

std::string response_format(SpecLevel level) {
    std::string format = "1. Overview\n2. Interface and Ports\n3. Functional Description";
    if (level == SpecLevel::LAS) format += "\n4. State Machines";
    return format;
}

std::string width_text(const BitWidth& width) {
    if (std::holds_alternative<std::uint32_t>(width)) {
        auto bits = std::get<std::uint32_t>(width);
        return std::to_string(bits) + (bits == 1 ? " bit" : " bits");
    }
    return std::get<std::string>(width);
}

const char* direction_text(PortDirection direction) {
    switch (direction) {
    case PortDirection::In: return "input";
    case PortDirection::Out: return "output";
    case PortDirection::InOut: return "inout";
    }
    return "input";
}

} // namespace

const std::map<std::string, std::set<std::string>>& TemplateStore::expected_templates() {
    static const std::map<std::string, std::set<std::string>> kExpected{
        {"generation_init", {"level_name", "level_definition", "response_format"}},
        {"brief_request", {"brief"}},
        {"rtl_request", {"module_name", "port_summary", "rtl_source"}},
        {"review_init", {"level_name", "category_list"}},
        {"section_review", {"section_label", "section_text"}},
        {"cross_level", {"higher_label", "higher_text", "lower_label", "lower_text"}},
        {"whole_file_review", {"document_title", "document_text"}},
        {"whole_file_section_detail", {"section_label"}},
    };
    return kExpected;
}

TemplateStore TemplateStore::load(const std::string& dir) {
    TemplateStore store;
    for (const auto& [id, expected_slots] : expected_templates()) {
        const auto path = std::filesystem::path(dir) / (id + ".txt");
        std::ifstream in(path, std::ios::binary);
        if (!in) raise(Err::TemplateError, "missing template file " + path.string());
        std::ostringstream buffer;
        buffer << in.rdbuf();
        std::string body = buffer.str();
        if (!text::is_valid_utf8(body)) {
            raise(Err::EncodingError, "template " + id + " is not valid UTF-8");
        }
        if (!body.empty() && body.back() == '\n') body.pop_back();

        PromptTemplate tmpl;
        tmpl.template_id = id;
        tmpl.body = std::move(body);
        tmpl.required_slots = scan_slots(tmpl.body);
        if (tmpl.required_slots != expected_slots) {
            raise(Err::TemplateError, "template " + id + " slot set does not match its contract");
        }
        tmpl.digest = text::fnv1a_hex(tmpl.body);
        store.templates_.emplace(id, std::move(tmpl));
    }
    return store;
}

const PromptTemplate& TemplateStore::get(const std::string& template_id) const {
    auto it = templates_.find(template_id);
    if (it == templates_.end()) raise(Err::TemplateError, "unknown template " + template_id);
    return it->second;
}

std::string TemplateStore::render(const std::string& template_id,
                                  const std::map<std::string, std::string>& slots) const {
    const PromptTemplate& tmpl = get(template_id);
    for (const auto& slot : tmpl.required_slots) {
        if (!slots.count(slot)) {
            raise(Err::TemplateError, "missing slot \"" + slot + "\" for " + template_id);
        }
    }
    // Single pass so substituted values are never re-scanned.
    std::string out;
    out.reserve(tmpl.body.size());
    const std::string& body = tmpl.body;
    size_t pos = 0;
    while (pos < body.size()) {
        if (body[pos] == '{') {
            size_t end = pos + 1;
            while (end < body.size() &&
                   (std::islower(static_cast<unsigned char>(body[end])) || body[end] == '_')) {
                ++end;
            }
            if (end < body.size() && body[end] == '}' && end > pos + 1) {
                const std::string name = body.substr(pos + 1, end - pos - 1);
                out += slots.at(name);
                pos = end + 1;
                continue;
            }
        }
        out.push_back(body[pos]);
        ++pos;
    }
    return out;
}

std::map<std::string, std::string> TemplateStore::digests() const {
    std::map<std::string, std::string> out;
    for (const auto& [id, tmpl] : templates_) out.emplace(id, tmpl.digest);
    return out;
}

std::string section_label(const Section& section) {
    std::string label = "Section " + std::to_string(section.index + 1);
    if (section.heading) {
        std::string_view heading = *section.heading;
        while (!heading.empty() && (heading.front() == '#')) heading.remove_prefix(1);
        while (!heading.empty() && (heading.front() == ' ' || heading.front() == '\t')) {
            heading.remove_prefix(1);
        }
        if (!heading.empty()) label += " (" + std::string(heading) + ")";
    }
    return label;
}

std::string level_long_name(SpecLevel level) {
    switch (level) {
    case SpecLevel::HAS: return "highest-level architecture specification (HAS)";
    case SpecLevel::MAS: return "middle-level architecture specification (MAS)";
    case SpecLevel::LAS: return "lowest-level architecture specification (LAS)";
    }
    return "";
}

RenderedPrompt PromptKit::make_prompt(const std::string& template_id, gateway::Role role,
                                      const std::map<std::string, std::string>& slots) const {
    RenderedPrompt prompt;
    prompt.template_id = template_id;
    prompt.messages.push_back({role, store_.render(template_id, slots)});
    std::string canonical = template_id;
    for (const auto& msg : prompt.messages) {
        canonical.push_back('\x1e');
        canonical.append(gateway::role_name(msg.role));
        canonical.push_back('\x1f');
        canonical.append(msg.content);
    }
    prompt.digest = text::fnv1a_hex(canonical);
    return prompt;
}

RenderedPrompt PromptKit::render_generation_init(SpecLevel level) const {
    if (level == SpecLevel::HAS) {
        raise(Err::UnsupportedLevel, "HAS documents are not generated");
    }
    return make_prompt("generation_init", gateway::Role::System,
                       {{"level_name", level_long_name(level)},
                        {"level_definition", level_definition(level)},
                        {"response_format", response_format(level)}});
}

RenderedPrompt PromptKit::render_brief_request(const std::string& brief) const {
    if (text::trim(brief).empty()) raise(Err::EmptyBrief, "design brief is empty");
    return make_prompt("brief_request", gateway::Role::User, {{"brief", brief}});
}

RenderedPrompt PromptKit::render_rtl_request(const std::string& rtl_source,
                                             const RtlModule& module) const {
    if (text::trim(rtl_source).empty()) raise(Err::EmptyRtl, "RTL source is empty");
    std::string ports;
    for (const auto& port : module.ports) {
        if (!ports.empty()) ports += ", ";
        ports += port.name + " (" + direction_text(port.direction) + ", " +
                 width_text(port.width_bits) + ")";
    }
    if (ports.empty()) ports = "none";
    return make_prompt("rtl_request", gateway::Role::User,
                       {{"module_name", module.name},
                        {"port_summary", ports},
                        {"rtl_source", rtl_source}});
}

RenderedPrompt PromptKit::render_review_init(SpecLevel level) const {
    std::string category_list;
    for (const auto& cat : applicable_categories(level, DefectScope::SingleFile)) {
        category_list += "- ";
        category_list += cat.display_name;
        category_list += ": ";
        category_list += cat.definition;
        category_list += "\n";
    }
    if (!category_list.empty()) category_list.pop_back();
    return make_prompt("review_init", gateway::Role::System,
                       {{"level_name", level_long_name(level)},
                        {"category_list", category_list}});
}

RenderedPrompt PromptKit::render_section_review(const Section& section) const {
    if (text::trim(section.body).empty()) {
        raise(Err::EmptySection, "section body is empty");
    }
    return make_prompt("section_review", gateway::Role::User,
                       {{"section_label", section_label(section)},
                        {"section_text", section.body}});
}

RenderedPrompt PromptKit::render_cross_level(const std::string& higher_text,
                                             SpecLevel higher_level, const Section& lower_section,
                                             SpecLevel lower_level) const {
    if (text::trim(higher_text).empty() || text::trim(lower_section.body).empty()) {
        raise(Err::EmptyInput, "cross-level review needs both documents' text");
    }
    return make_prompt("cross_level", gateway::Role::User,
                       {{"higher_label", level_name(higher_level)},
                        {"higher_text", higher_text},
                        {"lower_label", std::string(level_name(lower_level)) + ", " +
                                            section_label(lower_section)},
                        {"lower_text", lower_section.body}});
}

RenderedPrompt PromptKit::render_whole_file_review(const SpecDocument& doc) const {
    std::string full_text;
    for (const auto& section : doc.sections) full_text += section.body;
    return make_prompt("whole_file_review", gateway::Role::User,
                       {{"document_title", doc.title}, {"document_text", full_text}});
}

RenderedPrompt PromptKit::render_section_detail(const Section& section) const {
    return make_prompt("whole_file_section_detail", gateway::Role::User,
                       {{"section_label", section_label(section)}});
}

} // namespace specsmith::prompts
