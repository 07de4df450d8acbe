#pragma once

#include <string>

#include "specsmith/core.hpp"

namespace specsmith::docstore {

// Writes a SpecDocument as <parent_dir>/<id>/index.json plus one body file
// per section (000.md, 001.md, ...). Returns the document directory.
// Concatenating the section files in index order reproduces the ingested
// source byte-for-byte.
std::string save_document(const SpecDocument& doc, const std::string& parent_dir);

// Loads a document directory written by save_document; validates section
// ordering, spans and token totals.
SpecDocument load_document(const std::string& doc_dir);

} // namespace specsmith::docstore
