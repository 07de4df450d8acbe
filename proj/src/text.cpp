#include "specsmith/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace specsmith::text {

namespace {

// Returns the length of the UTF-8 sequence starting at `lead`, or 0 when the
// lead byte is invalid.
int sequence_length(unsigned char lead) {
    if (lead < 0x80) return 1;
    if ((lead & 0xE0) == 0xC0) return 2;
    if ((lead & 0xF0) == 0xE0) return 3;
    if ((lead & 0xF8) == 0xF0) return 4;
    return 0;
}

struct Composition {
    char32_t base;
    char32_t mark;
    char32_t composed;
};

// Latin-1 Supplement canonical compositions: base letter plus one of the
// combining marks grave U+0300, acute U+0301, circumflex U+0302, tilde
// U+0303, macron U+0304, diaeresis U+0308, ring above U+030A, cedilla U+0327.
constexpr std::array<Composition, 58> kCompositions{{
    {U'A', 0x0300, 0x00C0}, {U'A', 0x0301, 0x00C1}, {U'A', 0x0302, 0x00C2},
    {U'A', 0x0303, 0x00C3}, {U'A', 0x0308, 0x00C4}, {U'A', 0x030A, 0x00C5},
    {U'C', 0x0327, 0x00C7}, {U'E', 0x0300, 0x00C8}, {U'E', 0x0301, 0x00C9},
    {U'E', 0x0302, 0x00CA}, {U'E', 0x0308, 0x00CB}, {U'I', 0x0300, 0x00CC},
    {U'I', 0x0301, 0x00CD}, {U'I', 0x0302, 0x00CE}, {U'I', 0x0308, 0x00CF},
    {U'N', 0x0303, 0x00D1}, {U'O', 0x0300, 0x00D2}, {U'O', 0x0301, 0x00D3},
    {U'O', 0x0302, 0x00D4}, {U'O', 0x0303, 0x00D5}, {U'O', 0x0308, 0x00D6},
    {U'U', 0x0300, 0x00D9}, {U'U', 0x0301, 0x00DA}, {U'U', 0x0302, 0x00DB},
    {U'U', 0x0308, 0x00DC}, {U'Y', 0x0301, 0x00DD}, {U'a', 0x0300, 0x00E0},
    {U'a', 0x0301, 0x00E1}, {U'a', 0x0302, 0x00E2}, {U'a', 0x0303, 0x00E3},
    {U'a', 0x0308, 0x00E4}, {U'a', 0x030A, 0x00E5}, {U'c', 0x0327, 0x00E7},
    {U'e', 0x0300, 0x00E8}, {U'e', 0x0301, 0x00E9}, {U'e', 0x0302, 0x00EA},
    {U'e', 0x0308, 0x00EB}, {U'i', 0x0300, 0x00EC}, {U'i', 0x0301, 0x00ED},
    {U'i', 0x0302, 0x00EE}, {U'i', 0x0308, 0x00EF}, {U'n', 0x0303, 0x00F1},
    {U'o', 0x0300, 0x00F2}, {U'o', 0x0301, 0x00F3}, {U'o', 0x0302, 0x00F4},
    {U'o', 0x0303, 0x00F5}, {U'o', 0x0308, 0x00F6}, {U'u', 0x0300, 0x00F9},
    {U'u', 0x0301, 0x00FA}, {U'u', 0x0302, 0x00FB}, {U'u', 0x0308, 0x00FC},
    {U'y', 0x0301, 0x00FD}, {U'y', 0x0308, 0x00FF}, {U'A', 0x0304, 0x0100},
    {U'a', 0x0304, 0x0101}, {U'E', 0x0304, 0x0112}, {U'e', 0x0304, 0x0113},
    {U'O', 0x0304, 0x014C},
}};

bool compose_pair(char32_t base, char32_t mark, char32_t& out) {
    for (const auto& c : kCompositions) {
        if (c.base == base && c.mark == mark) {
            out = c.composed;
            return true;
        }
    }
    return false;
}

} // namespace

bool is_valid_utf8(std::string_view bytes) {
    size_t i = 0;
    const size_t n = bytes.size();
    while (i < n) {
        unsigned char lead = static_cast<unsigned char>(bytes[i]);
        int len = sequence_length(lead);
        if (len == 0 || i + len > n) return false;
        char32_t cp = 0;
        switch (len) {
        case 1:
            cp = lead;
            break;
        case 2:
            cp = lead & 0x1F;
            break;
        case 3:
            cp = lead & 0x0F;
            break;
        case 4:
            cp = lead & 0x07;
            break;
        }
        for (int k = 1; k < len; ++k) {
            unsigned char cont = static_cast<unsigned char>(bytes[i + k]);
            if ((cont & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cont & 0x3F);
        }
        // Overlong encodings, surrogates, out-of-range.
        if (len == 2 && cp < 0x80) return false;
        if (len == 3 && cp < 0x800) return false;
        if (len == 4 && cp < 0x10000) return false;
        if (cp >= 0xD800 && cp <= 0xDFFF) return false;
        if (cp > 0x10FFFF) return false;
        i += len;
    }
    return true;
}

std::vector<char32_t> decode_utf8(std::string_view bytes) {
    std::vector<char32_t> out;
    out.reserve(bytes.size());
    size_t i = 0;
    while (i < bytes.size()) {
        unsigned char lead = static_cast<unsigned char>(bytes[i]);
        int len = sequence_length(lead);
        char32_t cp = 0;
        switch (len) {
        case 1:
            cp = lead;
            break;
        case 2:
            cp = lead & 0x1F;
            break;
        case 3:
            cp = lead & 0x0F;
            break;
        default:
            cp = lead & 0x07;
            len = 4;
            break;
        }
        for (int k = 1; k < len && i + k < bytes.size(); ++k) {
            cp = (cp << 6) | (static_cast<unsigned char>(bytes[i + k]) & 0x3F);
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string encode_utf8(const std::vector<char32_t>& codepoints) {
    std::string out;
    out.reserve(codepoints.size());
    for (char32_t cp : codepoints) {
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

std::string nfc_compose(std::string_view utf8) {
    if (!is_valid_utf8(utf8)) return std::string(utf8);
    auto cps = decode_utf8(utf8);
    std::vector<char32_t> out;
    out.reserve(cps.size());
    for (char32_t cp : cps) {
        if (!out.empty()) {
            char32_t composed = 0;
            if (compose_pair(out.back(), cp, composed)) {
                out.back() = composed;
                continue;
            }
        }
        out.push_back(cp);
    }
    return encode_utf8(out);
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<size_t>(i)] = digits[h & 0xF];
        h >>= 4;
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string trim(std::string_view s) {
    size_t first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    size_t last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string normalize_token(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

} // namespace specsmith::text
