#pragma once

#include <span>
#include <string>
#include <string_view>

namespace archgraph {

// Lower-case hex SHA-256 of the bytes of `data`.
std::string sha256_hex(std::string_view data);

// The URI-template `hash()` function: SHA-256 over the arguments joined by
// U+001F (unit separator), truncated to 32 hex characters.
std::string content_hash(std::span<const std::string> parts);

// RFC 4122 name-based (SHA-1) UUID in the URL namespace.
std::string uuid_v5(std::string_view name);

}  // namespace archgraph
