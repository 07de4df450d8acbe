#include "specsmith/catalog.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace specsmith::catalog {

namespace {

using nlohmann::json;

ManifestEntry parse_entry(const json& node) {
    if (!node.is_object()) raise(Err::ParseError, "manifest entry must be an object");

    static const std::set<std::string> kKnownKeys{"id",          "title", "level",
                                                  "product_type", "source_url", "notes"};
    for (auto it = node.begin(); it != node.end(); ++it) {
        if (!kKnownKeys.count(it.key())) {
            raise(Err::ParseError, "unknown manifest key \"" + it.key() + "\"");
        }
    }
    for (const char* key : {"id", "title", "level", "product_type", "source_url"}) {
        if (!node.contains(key) || !node.at(key).is_string()) {
            raise(Err::ParseError, std::string("manifest entry missing string key \"") + key +
                                       "\"");
        }
    }

    ManifestEntry entry;
    entry.id = node.at("id").get<std::string>();
    entry.title = node.at("title").get<std::string>();
    entry.source_url = node.at("source_url").get<std::string>();
    if (entry.source_url.empty()) {
        raise(Err::ParseError, "entry \"" + entry.id + "\" has empty source_url");
    }

    const std::string level_text = node.at("level").get<std::string>();
    auto level = parse_level(level_text);
    if (!level) raise(Err::UnknownLevel, "\"" + level_text + "\" in entry \"" + entry.id + "\"");
    entry.level = *level;

    const std::string type_text = node.at("product_type").get<std::string>();
    auto type = parse_product_type(type_text);
    if (!type) {
        raise(Err::UnknownProductType, "\"" + type_text + "\" in entry \"" + entry.id + "\"");
    }
    entry.product_type = *type;

    if (node.contains("notes")) {
        if (!node.at("notes").is_string()) {
            raise(Err::ParseError, "notes must be a string in entry \"" + entry.id + "\"");
        }
        entry.notes = node.at("notes").get<std::string>();
    }
    return entry;
}

} // namespace

std::vector<ManifestEntry> parse_manifest(const std::string& json_text) {
    json root = json::parse(json_text, nullptr, false);
    if (root.is_discarded()) raise(Err::ParseError, "manifest is not valid JSON");
    if (!root.is_object()) raise(Err::ParseError, "manifest root must be an object");
    for (auto it = root.begin(); it != root.end(); ++it) {
        if (it.key() != "version" && it.key() != "entries") {
            raise(Err::ParseError, "unknown top-level key \"" + it.key() + "\"");
        }
    }
    if (!root.contains("version") || !root.at("version").is_number_integer() ||
        root.at("version").get<int>() != 1) {
        raise(Err::ParseError, "manifest version must be the integer 1");
    }
    if (!root.contains("entries") || !root.at("entries").is_array()) {
        raise(Err::ParseError, "manifest must contain an entries array");
    }

    std::vector<ManifestEntry> entries;
    std::set<std::string> seen_ids;
    for (const auto& node : root.at("entries")) {
        ManifestEntry entry = parse_entry(node);
        if (!seen_ids.insert(entry.id).second) {
            raise(Err::DuplicateId, "id \"" + entry.id + "\" appears more than once");
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Err::IoError, "cannot open manifest file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_manifest(buffer.str());
}

ManifestStats manifest_stats(const std::vector<ManifestEntry>& entries) {
    if (entries.empty()) raise(Err::EmptyManifest, "manifest has no entries");
    ManifestStats stats;
    for (const auto& entry : entries) {
        ++stats.by_level[entry.level];
        ++stats.by_type[entry.product_type];
    }
    return stats;
}

} // namespace specsmith::catalog
