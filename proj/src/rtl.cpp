#include "specsmith/rtl.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "specsmith/text.hpp"

namespace specsmith::rtl {

namespace {

struct Token {
    std::string text;
    size_t pos = 0;
};

// Replaces comments and string literals with spaces so offsets stay valid.
std::string strip_comments_and_strings(const std::string& source) {
    std::string out = source;
    size_t i = 0;
    const size_t n = out.size();
    while (i < n) {
        if (out[i] == '/' && i + 1 < n && out[i + 1] == '/') {
            while (i < n && out[i] != '\n') out[i++] = ' ';
        } else if (out[i] == '/' && i + 1 < n && out[i + 1] == '*') {
            out[i++] = ' ';
            out[i++] = ' ';
            while (i < n && !(out[i] == '*' && i + 1 < n && out[i + 1] == '/')) {
                if (out[i] != '\n') out[i] = ' ';
                ++i;
            }
            if (i + 1 < n) {
                out[i++] = ' ';
                out[i++] = ' ';
            } else {
                i = n;
            }
        } else if (out[i] == '"') {
            out[i++] = ' ';
            while (i < n && out[i] != '"') {
                if (out[i] == '\\' && i + 1 < n) out[i + 1] = ' ';
                if (out[i] != '\n') out[i] = ' ';
                ++i;
            }
            if (i < n) out[i++] = ' ';
        } else {
            ++i;
        }
    }
    return out;
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

std::vector<Token> tokenize(const std::string& source) {
    std::vector<Token> tokens;
    size_t i = 0;
    const size_t n = source.size();
    while (i < n) {
        char c = source[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (is_ident_start(c)) {
            size_t start = i;
            while (i < n && is_ident_char(source[i])) ++i;
            tokens.push_back({source.substr(start, i - start), start});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            // Numbers including based literals (8'hFF) and underscores.
            size_t start = i;
            while (i < n && (std::isalnum(static_cast<unsigned char>(source[i])) ||
                             source[i] == '_' || source[i] == '\'')) {
                ++i;
            }
            tokens.push_back({source.substr(start, i - start), start});
            continue;
        }
        tokens.push_back({std::string(1, c), i});
        ++i;
    }
    return tokens;
}

bool is_direction_kw(const std::string& word) {
    return word == "input" || word == "output" || word == "inout";
}

PortDirection direction_from_kw(const std::string& word) {
    if (word == "output") return PortDirection::Out;
    if (word == "inout") return PortDirection::InOut;
    return PortDirection::In;
}

bool is_net_type_kw(const std::string& word) {
    static const std::set<std::string> kNetTypes{
        "wire", "reg",  "logic", "tri",   "tri0",   "tri1",    "wand", "wor",
        "bit",  "byte", "int",   "integer", "signed", "unsigned", "var",  "supply0",
        "supply1"};
    return kNetTypes.count(word) > 0;
}

std::optional<long> parse_int_literal(const std::string& word) {
    if (word.empty()) return std::nullopt;
    size_t i = (word[0] == '-') ? 1 : 0;
    if (i >= word.size()) return std::nullopt;
    for (size_t k = i; k < word.size(); ++k) {
        if (!std::isdigit(static_cast<unsigned char>(word[k]))) return std::nullopt;
    }
    return std::strtol(word.c_str(), nullptr, 10);
}

// Parses "[msb:lsb]" starting at tokens[i] == "[". Returns the width and
// advances i past "]".
BitWidth parse_range(const std::vector<Token>& tokens, size_t& i, const std::string& source) {
    const size_t open_pos = tokens[i].pos;
    int depth = 0;
    size_t colon_index = 0;
    size_t close_index = 0;
    for (size_t k = i; k < tokens.size(); ++k) {
        const std::string& t = tokens[k].text;
        if (t == "[") ++depth;
        else if (t == "]") {
            --depth;
            if (depth == 0) {
                close_index = k;
                break;
            }
        } else if (t == ":" && depth == 1 && colon_index == 0) {
            colon_index = k;
        }
    }
    if (close_index == 0) raise(Err::UnbalancedDelimiters, "unterminated range");

    BitWidth width;
    bool literal = false;
    if (colon_index != 0 && colon_index == i + 2 && close_index == i + 4) {
        auto msb = parse_int_literal(tokens[i + 1].text);
        auto lsb = parse_int_literal(tokens[i + 3].text);
        if (msb && lsb) {
            width = static_cast<std::uint32_t>(std::labs(*msb - *lsb) + 1);
            literal = true;
        }
    }
    if (!literal) {
        const size_t end_pos = tokens[close_index].pos + 1;
        width = source.substr(open_pos, end_pos - open_pos);
    }
    i = close_index + 1;
    return width;
}

struct HeaderEntry {
    std::vector<Token> tokens;
};

// Splits tokens between an opening "(" (at i) and its matching ")" into
// comma-separated entries. Advances i past ")".
std::vector<HeaderEntry> split_paren_list(const std::vector<Token>& tokens, size_t& i) {
    std::vector<HeaderEntry> entries;
    HeaderEntry current;
    int paren = 0, bracket = 0, brace = 0;
    size_t k = i;
    for (; k < tokens.size(); ++k) {
        const std::string& t = tokens[k].text;
        if (t == "`") {
            raise(Err::UnbalancedDelimiters, "preprocessor directive inside a port list");
        }
        if (t == "(") {
            if (++paren == 1) continue;
        } else if (t == ")") {
            if (--paren == 0) break;
        } else if (t == "[") {
            ++bracket;
        } else if (t == "]") {
            --bracket;
        } else if (t == "{") {
            ++brace;
        } else if (t == "}") {
            --brace;
        } else if (t == "," && paren == 1 && bracket == 0 && brace == 0) {
            entries.push_back(std::move(current));
            current = HeaderEntry{};
            continue;
        }
        if (paren >= 1) current.tokens.push_back(tokens[k]);
    }
    if (k >= tokens.size() || paren != 0 || bracket != 0 || brace != 0) {
        raise(Err::UnbalancedDelimiters, "unbalanced delimiters in list");
    }
    if (!current.tokens.empty() || !entries.empty()) entries.push_back(std::move(current));
    i = k + 1;
    return entries;
}

void parse_parameter_entries(const std::vector<HeaderEntry>& entries, const std::string& source,
                             std::vector<RtlParameter>& out) {
    for (const auto& entry : entries) {
        const auto& toks = entry.tokens;
        if (toks.empty()) continue;
        size_t eq = toks.size();
        for (size_t k = 0; k < toks.size(); ++k) {
            if (toks[k].text == "=") {
                eq = k;
                break;
            }
        }
        // Name is the last identifier before "=" (or at all).
        size_t name_index = toks.size();
        size_t limit = std::min(eq, toks.size());
        for (size_t k = 0; k < limit; ++k) {
            if (is_ident_start(toks[k].text[0]) && !is_net_type_kw(toks[k].text) &&
                toks[k].text != "parameter" && toks[k].text != "localparam") {
                name_index = k;
            }
        }
        if (name_index == toks.size()) continue;
        RtlParameter param;
        param.name = toks[name_index].text;
        if (eq + 1 < toks.size()) {
            const size_t start = toks[eq + 1].pos;
            const Token& last = toks.back();
            param.default_value =
                text::trim(source.substr(start, last.pos + last.text.size() - start));
        }
        out.push_back(std::move(param));
    }
}

} // namespace

std::vector<RtlModule> parse_verilog_interface(const std::string& source) {
    if (text::trim(source).empty()) raise(Err::EmptyRtl, "RTL source is empty");
    if (!text::is_valid_utf8(source)) raise(Err::EncodingError, "RTL source is not valid UTF-8");
    const std::string clean = strip_comments_and_strings(source);
    const auto tokens = tokenize(clean);

    std::vector<RtlModule> modules;
    size_t i = 0;
    while (i < tokens.size()) {
        if (tokens[i].text != "module" && tokens[i].text != "macromodule") {
            ++i;
            continue;
        }
        ++i;
        if (i >= tokens.size() || !is_ident_start(tokens[i].text[0])) {
            raise(Err::NoModuleFound, "module keyword without a name");
        }
        RtlModule module;
        module.name = tokens[i].text;
        ++i;

        if (i < tokens.size() && tokens[i].text == "#") {
            ++i;
            if (i >= tokens.size() || tokens[i].text != "(") {
                raise(Err::UnbalancedDelimiters, "expected ( after # in module " + module.name);
            }
            auto entries = split_paren_list(tokens, i);
            parse_parameter_entries(entries, clean, module.parameters);
        }

        std::vector<std::string> pending_order; // non-ANSI: names awaiting body decls
        std::map<std::string, size_t> port_index;
        if (i < tokens.size() && tokens[i].text == "(") {
            auto entries = split_paren_list(tokens, i);
            bool ansi = false;
            PortDirection current_direction = PortDirection::In;
            BitWidth current_width = std::uint32_t{1};
            for (const auto& entry : entries) {
                const auto& toks = entry.tokens;
                if (toks.empty()) continue;
                size_t k = 0;
                bool has_direction = false;
                for (const auto& tok : toks) {
                    if (is_direction_kw(tok.text)) {
                        has_direction = true;
                        break;
                    }
                }
                if (has_direction) {
                    ansi = true;
                    while (k < toks.size() && !is_direction_kw(toks[k].text)) ++k;
                    current_direction = direction_from_kw(toks[k].text);
                    ++k;
                    while (k < toks.size() && is_net_type_kw(toks[k].text)) ++k;
                    current_width = std::uint32_t{1};
                    if (k < toks.size() && toks[k].text == "[") {
                        current_width = parse_range(toks, k, clean);
                    }
                }
                // Name: last identifier in the entry.
                size_t name_index = toks.size();
                for (size_t m = k; m < toks.size(); ++m) {
                    if (is_ident_start(toks[m].text[0]) && !is_net_type_kw(toks[m].text) &&
                        !is_direction_kw(toks[m].text)) {
                        name_index = m;
                    }
                }
                if (name_index == toks.size()) continue;
                const std::string& name = toks[name_index].text;
                if (port_index.count(name)) continue; // duplicate names ignored
                if (ansi) {
                    port_index[name] = module.ports.size();
                    module.ports.push_back({name, current_direction, current_width});
                } else {
                    port_index[name] = module.ports.size();
                    module.ports.push_back({name, PortDirection::In, std::uint32_t{1}});
                    pending_order.push_back(name);
                }
            }
        }
        if (i < tokens.size() && tokens[i].text == ";") ++i;

        // Body scan up to endmodule: non-ANSI direction declarations and
        // body parameters.
        size_t body_start = i;
        size_t end_index = tokens.size();
        for (size_t k = body_start; k < tokens.size(); ++k) {
            if (tokens[k].text == "endmodule") {
                end_index = k;
                break;
            }
        }
        if (end_index == tokens.size()) {
            raise(Err::UnbalancedDelimiters, "missing endmodule for module " + module.name);
        }
        for (size_t k = body_start; k < end_index; ++k) {
            const std::string& word = tokens[k].text;
            if (is_direction_kw(word)) {
                PortDirection direction = direction_from_kw(word);
                size_t m = k + 1;
                while (m < end_index && is_net_type_kw(tokens[m].text)) ++m;
                BitWidth width = std::uint32_t{1};
                if (m < end_index && tokens[m].text == "[") {
                    width = parse_range(tokens, m, clean);
                }
                while (m < end_index && tokens[m].text != ";") {
                    if (is_ident_start(tokens[m].text[0])) {
                        auto it = port_index.find(tokens[m].text);
                        if (it != port_index.end()) {
                            module.ports[it->second].direction = direction;
                            module.ports[it->second].width_bits = width;
                        }
                    }
                    ++m;
                }
                k = m;
            } else if (word == "parameter" || word == "localparam") {
                size_t m = k;
                std::vector<Token> stmt;
                while (m < end_index && tokens[m].text != ";") stmt.push_back(tokens[m++]);
                if (word == "parameter") {
                    parse_parameter_entries({HeaderEntry{stmt}}, clean, module.parameters);
                }
                k = m;
            }
        }
        i = end_index + 1;
        modules.push_back(std::move(module));
    }

    if (modules.empty()) raise(Err::NoModuleFound, "no module declaration found");
    return modules;
}

std::string serialize_interface(const RtlModule& module) {
    std::string out = "module " + module.name;
    if (!module.parameters.empty()) {
        out += " #(\n";
        for (size_t k = 0; k < module.parameters.size(); ++k) {
            out += "    parameter " + module.parameters[k].name;
            if (module.parameters[k].default_value) {
                out += " = " + *module.parameters[k].default_value;
            }
            out += (k + 1 < module.parameters.size()) ? ",\n" : "\n";
        }
        out += ")";
    }
    if (!module.ports.empty()) {
        out += " (\n";
        for (size_t k = 0; k < module.ports.size(); ++k) {
            const auto& port = module.ports[k];
            out += "    ";
            switch (port.direction) {
            case PortDirection::In: out += "input"; break;
            case PortDirection::Out: out += "output"; break;
            case PortDirection::InOut: out += "inout"; break;
            }
            if (std::holds_alternative<std::uint32_t>(port.width_bits)) {
                auto bits = std::get<std::uint32_t>(port.width_bits);
                if (bits > 1) out += " [" + std::to_string(bits - 1) + ":0]";
            } else {
                const auto& symbolic = std::get<std::string>(port.width_bits);
                if (!symbolic.empty()) out += " " + symbolic;
            }
            out += " " + port.name;
            out += (k + 1 < module.ports.size()) ? ",\n" : "\n";
        }
        out += ")";
    }
    out += ";\nendmodule\n";
    return out;
}

std::vector<PortTableEntry> extract_spec_port_table(const GeneratedSpec& generated) {
    const GeneratedSection* ports_section = nullptr;
    for (const auto& section : generated.body_sections) {
        const std::string norm = text::to_lower(section.heading);
        if (norm.find("port") != std::string::npos ||
            norm.find("interface") != std::string::npos) {
            ports_section = &section;
            break;
        }
    }
    if (!ports_section) raise(Err::NoPortTable, "no interface/ports section in generated spec");

    // Collect contiguous table lines (starting with '|').
    std::vector<std::vector<std::string>> rows;
    std::istringstream stream(ports_section->body);
    std::string line;
    bool in_table = false;
    while (std::getline(stream, line)) {
        const std::string trimmed = text::trim(line);
        if (!trimmed.empty() && trimmed.front() == '|') {
            in_table = true;
            std::vector<std::string> cells;
            size_t start = 1;
            for (size_t k = 1; k <= trimmed.size(); ++k) {
                if (k == trimmed.size() || trimmed[k] == '|') {
                    cells.push_back(text::trim(trimmed.substr(start, k - start)));
                    start = k + 1;
                }
            }
            while (!cells.empty() && cells.back().empty()) cells.pop_back();
            rows.push_back(std::move(cells));
        } else if (in_table) {
            break;
        }
    }
    if (rows.empty()) raise(Err::NoPortTable, "interface section has no markdown table");

    const auto& header = rows.front();
    auto find_column = [&header](const char* needle) -> std::optional<size_t> {
        for (size_t k = 0; k < header.size(); ++k) {
            if (text::to_lower(header[k]).find(needle) != std::string::npos) return k;
        }
        return std::nullopt;
    };
    auto name_col = find_column("name");
    auto dir_col = find_column("direction");
    if (!name_col || !dir_col) {
        raise(Err::MalformedTable, "port table header must contain name and direction columns");
    }
    auto width_col = find_column("width");
    auto desc_col = find_column("desc");

    auto strip_ticks = [](std::string s) {
        s.erase(std::remove(s.begin(), s.end(), '`'), s.end());
        return text::trim(s);
    };

    std::vector<PortTableEntry> entries;
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        // Separator row: all cells dashes/colons.
        bool separator = !row.empty();
        for (const auto& cell : row) {
            if (cell.find_first_not_of("-: ") != std::string::npos) {
                separator = false;
                break;
            }
        }
        if (separator) continue;
        if (row.size() <= std::max(*name_col, *dir_col)) {
            raise(Err::MalformedTable, "port table row " + std::to_string(r) + " is too short");
        }
        PortTableEntry entry;
        entry.name = strip_ticks(row[*name_col]);
        if (entry.name.empty()) {
            raise(Err::MalformedTable, "port table row " + std::to_string(r) + " has no name");
        }
        const std::string dir_text = text::normalize_token(row[*dir_col]);
        if (dir_text == "in" || dir_text == "input") {
            entry.direction = PortDirection::In;
        } else if (dir_text == "out" || dir_text == "output") {
            entry.direction = PortDirection::Out;
        } else if (dir_text == "inout" || dir_text == "bidirectional" || dir_text == "bidir") {
            entry.direction = PortDirection::InOut;
        } else {
            raise(Err::MalformedTable, "unknown direction \"" + row[*dir_col] + "\"");
        }
        if (width_col && *width_col < row.size()) {
            const std::string width_text = strip_ticks(row[*width_col]);
            auto literal = parse_int_literal(width_text);
            if (literal && *literal > 0) {
                entry.width_bits = static_cast<std::uint32_t>(*literal);
            } else {
                entry.width_bits = width_text;
            }
        }
        if (desc_col && *desc_col < row.size() && !row[*desc_col].empty()) {
            entry.description = row[*desc_col];
        }
        entries.push_back(std::move(entry));
    }
    if (entries.empty()) raise(Err::NoPortTable, "port table has no data rows");
    return entries;
}

const char* issue_kind_name(IssueKind kind) {
    switch (kind) {
    case IssueKind::MissingInSpec: return "missing_in_spec";
    case IssueKind::MissingInRtl: return "missing_in_rtl";
    case IssueKind::DirectionMismatch: return "direction_mismatch";
    case IssueKind::WidthMismatch: return "width_mismatch";
    }
    return "missing_in_spec";
}

std::vector<ConsistencyIssue> cross_check_ports(const std::vector<PortTableEntry>& spec_ports,
                                                const RtlModule& rtl) {
    std::vector<ConsistencyIssue> issues;
    std::map<std::string, const RtlPort*> rtl_by_name;
    for (const auto& port : rtl.ports) rtl_by_name.emplace(port.name, &port);

    std::set<std::string> seen_spec;
    auto width_string = [](const BitWidth& width) {
        return std::holds_alternative<std::uint32_t>(width)
                   ? std::to_string(std::get<std::uint32_t>(width))
                   : std::get<std::string>(width);
    };
    auto direction_word = [](PortDirection direction) -> std::string {
        switch (direction) {
        case PortDirection::In: return "input";
        case PortDirection::Out: return "output";
        case PortDirection::InOut: return "inout";
        }
        return "input";
    };

    for (const auto& entry : spec_ports) {
        if (!seen_spec.insert(entry.name).second) continue; // duplicate row
        auto it = rtl_by_name.find(entry.name);
        if (it == rtl_by_name.end()) {
            issues.push_back({IssueKind::MissingInRtl, entry.name,
                              "spec lists port \"" + entry.name + "\" not present in the RTL"});
            continue;
        }
        const RtlPort& rtl_port = *it->second;
        if (entry.direction != rtl_port.direction) {
            issues.push_back({IssueKind::DirectionMismatch, entry.name,
                              "spec says " + direction_word(entry.direction) + ", RTL says " +
                                  direction_word(rtl_port.direction)});
        }
        const bool spec_literal = std::holds_alternative<std::uint32_t>(entry.width_bits);
        const bool rtl_literal = std::holds_alternative<std::uint32_t>(rtl_port.width_bits);
        const bool spec_stated =
            spec_literal || !std::get<std::string>(entry.width_bits).empty();
        if (!spec_stated) continue; // table has no width column for this row
        if (spec_literal && rtl_literal) {
            if (std::get<std::uint32_t>(entry.width_bits) !=
                std::get<std::uint32_t>(rtl_port.width_bits)) {
                issues.push_back({IssueKind::WidthMismatch, entry.name,
                                  "spec says " + width_string(entry.width_bits) +
                                      " bits, RTL says " + width_string(rtl_port.width_bits)});
            }
        } else if (!spec_literal && !rtl_literal) {
            if (text::normalize_token(std::get<std::string>(entry.width_bits)) !=
                text::normalize_token(std::get<std::string>(rtl_port.width_bits))) {
                issues.push_back({IssueKind::WidthMismatch, entry.name,
                                  "symbolic widths differ: spec \"" +
                                      width_string(entry.width_bits) + "\" vs RTL \"" +
                                      width_string(rtl_port.width_bits) + "\""});
            }
        } else {
            issues.push_back({IssueKind::WidthMismatch, entry.name,
                              "symbolic/literal width pairing: spec \"" +
                                  width_string(entry.width_bits) + "\" vs RTL \"" +
                                  width_string(rtl_port.width_bits) + "\" (symbolic)"});
        }
    }

    for (const auto& port : rtl.ports) {
        if (!seen_spec.count(port.name)) {
            issues.push_back({IssueKind::MissingInSpec, port.name,
                              "RTL port \"" + port.name + "\" is absent from the spec table"});
        }
    }
    return issues;
}

} // namespace specsmith::rtl
