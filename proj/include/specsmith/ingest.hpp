#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "specsmith/core.hpp"

namespace specsmith::ingest {

enum class HeadingStyle { MarkdownAtx, NumberedHeading, NamedChapter };

struct SplitPolicy {
    std::set<HeadingStyle> heading_styles{HeadingStyle::MarkdownAtx, HeadingStyle::NumberedHeading,
                                          HeadingStyle::NamedChapter};
    std::size_t min_section_chars = 0;
};

// ceil(utf8_bytes / 4). Zero iff the text is empty.
std::size_t estimate_tokens(std::string_view text);

// Splits a document into sections at heading lines recognized by `policy`.
// Concatenating the returned bodies in order reproduces the source
// byte-for-byte; text before the first heading becomes a heading-less
// preamble section. Heading lines inside fenced code blocks are ignored.
std::vector<Section> split_sections(std::string_view source, const SplitPolicy& policy);

SpecDocument build_document(std::string id, std::string title, SpecLevel level,
                            ProductType product_type, std::string source_path,
                            std::string_view source_text, const SplitPolicy& policy);

struct ChunkPart {
    std::size_t index = 1; // 1-based
    std::size_t count = 1;
};

struct Chunk {
    std::vector<Section> sections;
    std::size_t token_total = 0;
    std::optional<ChunkPart> part; // set when a single oversized section was sub-split
};

// Greedy first-fit packing in document order. A section whose own estimate
// exceeds the budget is sub-split at paragraph boundaries (blank lines) into
// parts, each its own chunk marked (k of m); a paragraph that alone exceeds
// the budget is hard-split at the last whitespace before the byte boundary.
std::vector<Chunk> chunk_sections(const std::vector<Section>& sections, std::size_t budget);

constexpr std::size_t kMinChunkBudget = 64;
constexpr std::size_t kDefaultChunkBudget = 6000;

} // namespace specsmith::ingest
