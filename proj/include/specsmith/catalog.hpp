#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "specsmith/core.hpp"

namespace specsmith::catalog {

struct ManifestEntry {
    std::string id;
    std::string title;
    SpecLevel level = SpecLevel::LAS;
    ProductType product_type = ProductType::CPU;
    std::string source_url;
    std::optional<std::string> notes;
};

// Parses a manifest JSON document:
//   {"version": 1, "entries": [{"id", "title", "level", "product_type",
//    "source_url", "notes"?}, ...]}
// Unknown keys, duplicate ids and unknown enum values are rejected.
std::vector<ManifestEntry> parse_manifest(const std::string& json_text);

std::vector<ManifestEntry> load_manifest(const std::string& path);

struct ManifestStats {
    std::map<SpecLevel, std::size_t> by_level;
    std::map<ProductType, std::size_t> by_type;
};

ManifestStats manifest_stats(const std::vector<ManifestEntry>& entries);

} // namespace specsmith::catalog
