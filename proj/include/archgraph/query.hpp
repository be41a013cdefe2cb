#pragma once

#include <optional>
#include <string>
#include <vector>

#include "archgraph/canonical_io.hpp"
#include "archgraph/graph_store.hpp"

namespace archgraph {

// Presentation bucket for grouped rows whose key variable is unbound.
inline constexpr const char* kUnknownBucket = "Unknown";

struct PatternTerm {
  bool variable = false;
  std::string value;  // variable name without '?', or an N-Quads token

  bool operator==(const PatternTerm&) const = default;
};

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;
  std::optional<PatternTerm> graph;  // absent: any graph

  bool operator==(const TriplePattern&) const = default;
};

struct Filter {
  enum class Op { kEq, kRange, kPrefix };
  enum class RangeKind { kNumber, kDate };

  Op op = Op::kEq;
  std::string variable;
  std::string value;  // eq: token; prefix: raw prefix of IRI or lexical form
  RangeKind kind = RangeKind::kNumber;
  std::optional<std::string> min;  // inclusive
  std::optional<std::string> max;  // inclusive

  bool operator==(const Filter&) const = default;
};

struct Query {
  std::vector<TriplePattern> patterns;
  std::vector<std::vector<TriplePattern>> optionals;
  std::vector<Filter> filters;
  std::vector<std::string> select;  // empty: every variable, in order of appearance
  std::optional<std::string> group_by;
  std::optional<std::string> count;  // variable counted distinctly per group
  bool distinct = false;

  bool operator==(const Query&) const = default;
};

struct ResultTable {
  std::vector<std::string> columns;
  // Plain rows hold tokens (nullopt = unbound). Grouped rows hold the key
  // token (nullopt = Unknown bucket) and the count in `counts`.
  std::vector<std::vector<std::optional<std::string>>> rows;
  bool grouped = false;
  std::vector<size_t> counts;

  Json to_json() const;
  std::string to_csv() const;
  std::string to_text() const;
  bool operator==(const ResultTable&) const = default;
};

// Human-facing rendering of a token: lexical form for literals, bare IRI.
std::string display_term(const std::string& token);

// Throws kMalformedQuery.
Query parse_query(const Json& doc);
Json query_to_json(const Query& q);
std::vector<std::string> query_variables(const Query& q);

// Pure filter predicate on one bound token; shared with test oracles.
bool filter_accepts(const Filter& f, const std::string* token);

// Groups plain solution rows (one column per variable in `variables`) into a
// grouped table. Shared by the engine and test oracles.
ResultTable group_rows(const Query& q, const std::vector<std::string>& variables,
                       const std::vector<std::vector<const std::string*>>& solutions);
ResultTable project_rows(const Query& q, const std::vector<std::string>& variables,
                         const std::vector<std::vector<const std::string*>>& solutions);

ResultTable run_query(const Snapshot& snapshot, const Query& q);

}  // namespace archgraph
