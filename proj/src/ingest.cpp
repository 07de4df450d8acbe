#include "specsmith/ingest.hpp"

#include <algorithm>
#include <cctype>

#include "specsmith/text.hpp"

namespace specsmith::ingest {

namespace {

bool is_blank_line(std::string_view line) {
    return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

bool matches_atx(std::string_view line) {
    size_t hashes = 0;
    while (hashes < line.size() && line[hashes] == '#') ++hashes;
    if (hashes < 1 || hashes > 6) return false;
    return hashes < line.size() && line[hashes] == ' ';
}

// Dotted-decimal heading: "1. Title", "2.3 Title", "10.1.4 Title". Requires a
// dot so a bare leading number ("4 bytes wide") never counts.
bool matches_numbered(std::string_view line) {
    size_t i = 0;
    if (i >= line.size() || !std::isdigit(static_cast<unsigned char>(line[i]))) return false;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size() || line[i] != '.') return false;
    bool saw_dot = false;
    while (i < line.size() && line[i] == '.') {
        saw_dot = true;
        ++i;
        size_t digits = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
            ++i;
            ++digits;
        }
        if (digits == 0) break; // trailing dot form: "1. Title"
    }
    if (!saw_dot) return false;
    if (i >= line.size() || (line[i] != ' ' && line[i] != '\t')) return false;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    return i < line.size() && !is_blank_line(line.substr(i));
}

bool matches_chapter(std::string_view line) {
    const std::string lower = text::to_lower(line.substr(0, 8));
    std::string_view rest;
    if (lower.rfind("chapter", 0) == 0) {
        rest = line.substr(7);
    } else if (lower.rfind("section", 0) == 0) {
        rest = line.substr(7);
    } else {
        return false;
    }
    size_t i = 0;
    size_t spaces = 0;
    while (i < rest.size() && (rest[i] == ' ' || rest[i] == '\t')) {
        ++i;
        ++spaces;
    }
    if (spaces == 0) return false;
    return i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]));
}

bool is_heading(std::string_view line, const SplitPolicy& policy) {
    for (HeadingStyle style : policy.heading_styles) {
        switch (style) {
        case HeadingStyle::MarkdownAtx:
            if (matches_atx(line)) return true;
            break;
        case HeadingStyle::NumberedHeading:
            if (matches_numbered(line)) return true;
            break;
        case HeadingStyle::NamedChapter:
            if (matches_chapter(line)) return true;
            break;
        }
    }
    return false;
}

std::string heading_text(std::string_view line) {
    std::string_view trimmed = line;
    while (!trimmed.empty() && (trimmed.back() == '\n' || trimmed.back() == '\r')) {
        trimmed.remove_suffix(1);
    }
    return std::string(trimmed);
}

std::size_t section_estimate(const std::optional<std::string>& heading, std::string_view body) {
    std::size_t bytes = body.size() + (heading ? heading->size() : 0);
    return (bytes + 3) / 4;
}

// Byte offsets (into `body`) of paragraph ends. A paragraph keeps its
// trailing blank lines so concatenation reproduces the body.
std::vector<std::size_t> paragraph_ends(std::string_view body) {
    std::vector<std::size_t> ends;
    size_t pos = 0;
    size_t paragraph_start = 0;
    bool in_blank_run = false;
    while (pos < body.size()) {
        size_t eol = body.find('\n', pos);
        size_t line_end = (eol == std::string_view::npos) ? body.size() : eol + 1;
        bool blank = is_blank_line(body.substr(pos, line_end - pos));
        if (!blank && in_blank_run) {
            ends.push_back(pos); // previous paragraph ended with the blank run
            paragraph_start = pos;
        }
        in_blank_run = blank && pos > paragraph_start;
        pos = line_end;
    }
    ends.push_back(body.size());
    return ends;
}

// Picks a cut in (start, limit], preferring the last whitespace and falling
// back to a UTF-8 lead-byte boundary.
std::size_t hard_cut(std::string_view body, std::size_t start, std::size_t limit) {
    limit = std::min(limit, body.size());
    for (size_t i = limit; i > start; --i) {
        unsigned char c = static_cast<unsigned char>(body[i - 1]);
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return i;
    }
    size_t cut = limit;
    while (cut > start + 1 && cut < body.size() &&
           (static_cast<unsigned char>(body[cut]) & 0xC0) == 0x80) {
        --cut;
    }
    return cut;
}

std::vector<Chunk> split_oversized(const Section& section, std::size_t budget) {
    const std::size_t byte_budget = budget * 4;
    const std::size_t heading_bytes = section.heading ? section.heading->size() : 0;
    // Pathological headings would leave no room for body bytes; drop them.
    const bool keep_heading = section.heading && heading_bytes + 16 <= byte_budget;

    std::vector<std::pair<std::size_t, std::size_t>> part_spans; // offsets into body
    const std::string& body = section.body;
    auto ends = paragraph_ends(body);

    std::size_t start = 0;
    size_t next_end = 0;
    while (start < body.size()) {
        bool first = part_spans.empty();
        std::size_t room = byte_budget - ((keep_heading && first) ? heading_bytes : 0);
        // Grow the part paragraph by paragraph while it fits.
        std::size_t part_end = start;
        while (next_end < ends.size() && ends[next_end] - start <= room) {
            part_end = ends[next_end];
            ++next_end;
        }
        if (part_end == start) {
            // Single paragraph too large: hard-split inside it.
            std::size_t target = (next_end < ends.size()) ? ends[next_end] : body.size();
            part_end = hard_cut(body, start, std::min(start + room, target));
            if (next_end < ends.size() && part_end >= ends[next_end]) ++next_end;
        }
        part_spans.emplace_back(start, part_end);
        start = part_end;
    }
    if (part_spans.empty()) part_spans.emplace_back(0, body.size());

    std::vector<Chunk> chunks;
    chunks.reserve(part_spans.size());
    for (size_t k = 0; k < part_spans.size(); ++k) {
        Section part;
        part.index = section.index;
        if (k == 0 && keep_heading) part.heading = section.heading;
        part.body = body.substr(part_spans[k].first, part_spans[k].second - part_spans[k].first);
        part.char_span = {section.char_span.first + part_spans[k].first,
                          section.char_span.first + part_spans[k].second};
        part.token_estimate = section_estimate(part.heading, part.body);
        Chunk chunk;
        chunk.token_total = part.token_estimate;
        chunk.sections.push_back(std::move(part));
        chunk.part = ChunkPart{k + 1, part_spans.size()};
        chunks.push_back(std::move(chunk));
    }
    return chunks;
}

} // namespace

std::size_t estimate_tokens(std::string_view text_in) {
    return (text_in.size() + 3) / 4;
}

std::vector<Section> split_sections(std::string_view source, const SplitPolicy& policy) {
    if (policy.heading_styles.empty()) {
        raise(Err::UsageError, "split policy must enable at least one heading style");
    }
    if (text::trim(source).empty()) {
        raise(Err::EmptyDocument, "document is empty or whitespace-only");
    }
    if (!text::is_valid_utf8(source)) {
        raise(Err::EncodingError, "input is not valid UTF-8");
    }

    // Section start offsets. Offset 0 opens the preamble (or first heading).
    std::vector<std::pair<std::size_t, std::optional<std::string>>> starts;
    bool in_fence = false;
    size_t pos = 0;
    while (pos < source.size()) {
        size_t eol = source.find('\n', pos);
        size_t line_end = (eol == std::string_view::npos) ? source.size() : eol + 1;
        std::string_view line = source.substr(pos, line_end - pos);
        std::string_view stripped = line;
        while (!stripped.empty() && (stripped.back() == '\n' || stripped.back() == '\r')) {
            stripped.remove_suffix(1);
        }
        if (stripped.rfind("```", 0) == 0) {
            in_fence = !in_fence;
        } else if (!in_fence && is_heading(stripped, policy)) {
            starts.emplace_back(pos, heading_text(stripped));
        }
        pos = line_end;
    }

    std::vector<Section> sections;
    std::size_t first_heading = starts.empty() ? source.size() : starts.front().first;
    if (first_heading > 0) {
        Section preamble;
        preamble.char_span = {0, first_heading};
        preamble.body = std::string(source.substr(0, first_heading));
        sections.push_back(std::move(preamble));
    }
    for (size_t i = 0; i < starts.size(); ++i) {
        std::size_t begin = starts[i].first;
        std::size_t end = (i + 1 < starts.size()) ? starts[i + 1].first : source.size();
        Section section;
        section.heading = starts[i].second;
        section.char_span = {begin, end};
        section.body = std::string(source.substr(begin, end - begin));
        sections.push_back(std::move(section));
    }

    // Fold sections shorter than the policy minimum into a neighbour.
    if (policy.min_section_chars > 0 && sections.size() > 1) {
        std::vector<Section> folded;
        for (auto& section : sections) {
            bool too_small = (section.char_span.second - section.char_span.first) <
                             policy.min_section_chars;
            if (too_small && !folded.empty()) {
                folded.back().body += section.body;
                folded.back().char_span.second = section.char_span.second;
            } else {
                folded.push_back(std::move(section));
            }
        }
        if (folded.size() > 1 &&
            (folded.front().char_span.second - folded.front().char_span.first) <
                policy.min_section_chars) {
            // First section too small: merge forward, next section's heading wins.
            folded[1].body = folded.front().body + folded[1].body;
            folded[1].char_span.first = folded.front().char_span.first;
            folded.erase(folded.begin());
        }
        sections = std::move(folded);
    }

    for (size_t i = 0; i < sections.size(); ++i) {
        sections[i].index = i;
        sections[i].token_estimate = section_estimate(sections[i].heading, sections[i].body);
    }
    return sections;
}

SpecDocument build_document(std::string id, std::string title, SpecLevel level,
                            ProductType product_type, std::string source_path,
                            std::string_view source_text, const SplitPolicy& policy) {
    if (id.empty()) raise(Err::InvalidId, "id must not be empty");
    for (char c : id) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '-';
        if (!ok) raise(Err::InvalidId, "id must match [a-z0-9-]+, got \"" + id + "\"");
    }

    SpecDocument doc;
    doc.id = std::move(id);
    doc.title = std::move(title);
    doc.level = level;
    doc.product_type = product_type;
    doc.source_path = std::move(source_path);
    doc.sections = split_sections(source_text, policy);
    doc.total_tokens = 0;
    for (const auto& section : doc.sections) doc.total_tokens += section.token_estimate;
    return doc;
}

std::vector<Chunk> chunk_sections(const std::vector<Section>& sections, std::size_t budget) {
    if (budget < kMinChunkBudget) {
        raise(Err::BudgetTooSmall,
              "chunk budget must be at least " + std::to_string(kMinChunkBudget));
    }

    std::vector<Chunk> chunks;
    Chunk current;
    auto flush = [&]() {
        if (!current.sections.empty()) {
            chunks.push_back(std::move(current));
            current = Chunk{};
        }
    };

    for (const auto& section : sections) {
        if (section.token_estimate > budget) {
            flush();
            auto parts = split_oversized(section, budget);
            for (auto& part : parts) chunks.push_back(std::move(part));
            continue;
        }
        if (current.token_total + section.token_estimate > budget) flush();
        current.token_total += section.token_estimate;
        current.sections.push_back(section);
    }
    flush();
    return chunks;
}

} // namespace specsmith::ingest
