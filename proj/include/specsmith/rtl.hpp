#pragma once

#include <optional>
#include <string>
#include <vector>

#include "specsmith/core.hpp"

namespace specsmith::rtl {

struct PortTableEntry {
    std::string name;
    PortDirection direction = PortDirection::In;
    BitWidth width_bits = std::string{}; // empty symbolic text = width not stated
    std::optional<std::string> description;
};

// Extracts module interfaces (names, parameters, typed ports) from Verilog
// source. Handles ANSI headers and non-ANSI bodies; comments and string
// literals are stripped before scanning. [M:N] with integer literals becomes
// |M-N|+1 bits, anything else keeps the raw range text.
std::vector<RtlModule> parse_verilog_interface(const std::string& source);

// Renders an extracted interface back to an ANSI-style module header;
// re-parsing the output yields the same RtlModule.
std::string serialize_interface(const RtlModule& module);

// Reads the markdown port table out of a generated spec's interface/ports
// section. The table header must contain "name" and "direction" columns.
std::vector<PortTableEntry> extract_spec_port_table(const GeneratedSpec& generated);

enum class IssueKind { MissingInSpec, MissingInRtl, DirectionMismatch, WidthMismatch };

const char* issue_kind_name(IssueKind kind);

struct ConsistencyIssue {
    IssueKind kind = IssueKind::MissingInSpec;
    std::string port_name;
    std::string detail;
};

// Mechanical spec-vs-RTL interface comparison. Name matching is
// case-sensitive; literal widths compare numerically, symbolic widths by
// exact text, and a symbolic/literal pairing is reported with a note.
std::vector<ConsistencyIssue> cross_check_ports(const std::vector<PortTableEntry>& spec_ports,
                                                const RtlModule& rtl);

} // namespace specsmith::rtl
