#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace archgraph::text {

// Case-folds ASCII and the Latin-1 supplement letters; other code points are
// copied unchanged.
std::string case_fold(std::string_view s);

std::string trim(std::string_view s);

// Replaces every run of ASCII whitespace with a single space.
std::string collapse_whitespace(std::string_view s);

// Lower-cases, maps runs of ASCII whitespace/punctuation to a single "-" and
// strips leading/trailing "-". Non-ASCII code points are kept (lower-cased
// where case_fold knows how). May return an empty string.
std::string slug(std::string_view s);

bool is_identifier(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::vector<std::string> split(std::string_view s, char sep);

}  // namespace archgraph::text
