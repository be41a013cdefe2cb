#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

namespace archgraph {

using Json = nlohmann::json;

// Canonical document text: sorted keys (nlohmann::json keeps object keys
// ordered), two-space indent, UTF-8 passed through, trailing LF.
std::string to_canonical(const Json& doc);

// Parses a document, turning syntax errors into kParseError with a
// "line L, column C" location.
Json parse_document(std::string_view text, std::string_view source_name = "document");

std::string read_file(const std::filesystem::path& path);

// Writes via a sibling temporary file and rename, so readers never observe a
// partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Typed field access that reports a kParseError naming the missing key.
const Json& require(const Json& obj, std::string_view key, std::string_view context);
std::string require_string(const Json& obj, std::string_view key, std::string_view context);

}  // namespace archgraph
