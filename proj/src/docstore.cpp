#include "specsmith/docstore.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace specsmith::docstore {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string section_file_name(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03zu.md", index);
    return buf;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(Err::IoError, "cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) raise(Err::IoError, "cannot write " + path.string());
    out << content;
    if (!out.good()) raise(Err::IoError, "write failed for " + path.string());
}

} // namespace

std::string save_document(const SpecDocument& doc, const std::string& parent_dir) {
    const fs::path dir = fs::path(parent_dir) / doc.id;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) raise(Err::IoError, "cannot create " + dir.string());

    json index;
    index["schema"] = 1;
    index["id"] = doc.id;
    index["title"] = doc.title;
    index["level"] = level_name(doc.level);
    index["product_type"] = product_type_name(doc.product_type);
    index["source_path"] = doc.source_path;
    index["total_tokens"] = doc.total_tokens;
    json sections = json::array();
    for (const auto& section : doc.sections) {
        json node;
        node["index"] = section.index;
        node["heading"] = section.heading ? json(*section.heading) : json(nullptr);
        node["token_estimate"] = section.token_estimate;
        node["char_span"] = {section.char_span.first, section.char_span.second};
        node["file"] = section_file_name(section.index);
        sections.push_back(std::move(node));
        write_file(dir / section_file_name(section.index), section.body);
    }
    index["sections"] = sections;
    write_file(dir / "index.json", index.dump(2) + "\n");
    return dir.string();
}

SpecDocument load_document(const std::string& doc_dir) {
    const fs::path dir(doc_dir);
    json index = json::parse(read_file(dir / "index.json"), nullptr, false);
    if (index.is_discarded() || !index.is_object()) {
        raise(Err::ParseError, "index.json is not valid JSON");
    }
    if (index.value("schema", 0) != 1) raise(Err::ParseError, "unsupported document schema");

    SpecDocument doc;
    doc.id = index.at("id").get<std::string>();
    doc.title = index.at("title").get<std::string>();
    auto level = parse_level(index.at("level").get<std::string>());
    if (!level) raise(Err::UnknownLevel, index.at("level").get<std::string>());
    doc.level = *level;
    auto type = parse_product_type(index.at("product_type").get<std::string>());
    if (!type) raise(Err::UnknownProductType, index.at("product_type").get<std::string>());
    doc.product_type = *type;
    doc.source_path = index.at("source_path").get<std::string>();
    doc.total_tokens = index.at("total_tokens").get<std::size_t>();

    std::size_t expected_index = 0;
    std::size_t expected_offset = 0;
    std::size_t token_sum = 0;
    for (const auto& node : index.at("sections")) {
        Section section;
        section.index = node.at("index").get<std::size_t>();
        if (section.index != expected_index) {
            raise(Err::ParseError, "section indices must be contiguous from 0");
        }
        if (!node.at("heading").is_null()) {
            section.heading = node.at("heading").get<std::string>();
        }
        section.token_estimate = node.at("token_estimate").get<std::size_t>();
        section.char_span = {node.at("char_span").at(0).get<std::size_t>(),
                             node.at("char_span").at(1).get<std::size_t>()};
        section.body = read_file(dir / node.at("file").get<std::string>());
        if (section.char_span.first != expected_offset ||
            section.char_span.second - section.char_span.first != section.body.size()) {
            raise(Err::ParseError,
                  "section " + std::to_string(section.index) + " span does not match its body");
        }
        expected_offset = section.char_span.second;
        token_sum += section.token_estimate;
        ++expected_index;
        doc.sections.push_back(std::move(section));
    }
    if (doc.sections.empty()) raise(Err::ParseError, "document has no sections");
    if (token_sum != doc.total_tokens) {
        raise(Err::ParseError, "total_tokens does not match the section sum");
    }
    return doc;
}

} // namespace specsmith::docstore
