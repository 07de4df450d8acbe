#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace specsmith::text {

// True when the byte sequence is well-formed UTF-8 (no overlong forms,
// surrogates, or codepoints above U+10FFFF).
bool is_valid_utf8(std::string_view bytes);

// Decodes UTF-8 into codepoints. Input must already be valid.
std::vector<char32_t> decode_utf8(std::string_view bytes);

std::string encode_utf8(const std::vector<char32_t>& codepoints);

// Canonical composition for cassette/prompt digests. Covers the Latin-1
// precomposed repertoire (base letter + combining mark -> single codepoint);
// sequences outside that table pass through unchanged.
std::string nfc_compose(std::string_view utf8);

// FNV-1a 64-bit rendered as 16 lowercase hex chars. Stable across platforms.
std::string fnv1a_hex(std::string_view bytes);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Lowercases and drops every non-alphanumeric character; used for fuzzy
// category-name matching.
std::string normalize_token(std::string_view s);

} // namespace specsmith::text
