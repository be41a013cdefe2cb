#include "archgraph/canonical_io.hpp"

#include <fstream>
#include <sstream>

#include "archgraph/error.hpp"

namespace archgraph {

std::string to_canonical(const Json& doc) {
  return doc.dump(2, ' ', false, Json::error_handler_t::strict) + "\n";
}

Json parse_document(std::string_view text, std::string_view source_name) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    size_t offset = e.byte == 0 ? 0 : e.byte - 1;
    size_t line = 1;
    size_t col = 1;
    for (size_t i = 0; i < offset && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << source_name << ": line " << line << ", column " << col << ": malformed document";
    throw Error(ErrorCode::kParseError, msg.str());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename " + tmp.string() + ": " + ec.message());
}

const Json& require(const Json& obj, std::string_view key, std::string_view context) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::kParseError, std::string(context) + ": expected an object");
  }
  auto it = obj.find(std::string(key));
  if (it == obj.end()) {
    throw Error(ErrorCode::kParseError,
                std::string(context) + ": missing field '" + std::string(key) + "'");
  }
  return *it;
}

std::string require_string(const Json& obj, std::string_view key, std::string_view context) {
  const Json& v = require(obj, key, context);
  if (!v.is_string()) {
    throw Error(ErrorCode::kParseError,
                std::string(context) + ": field '" + std::string(key) + "' must be a string");
  }
  return v.get<std::string>();
}

}  // namespace archgraph
