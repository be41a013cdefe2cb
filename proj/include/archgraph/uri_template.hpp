#pragma once

#include <cstddef>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace archgraph {

// URI templates:
//
//   template := ( literal | "{" expr "}" )*
//   expr     := "column:" NAME
//             | "'" TEXT "'"
//             | "slug(" expr ")"
//             | "hash(" expr ( "," expr )* ")"
//             | "node(" NAME ")"
//
// Top-level column values are percent-encoded where they are not valid IRI
// characters; function arguments see the raw cell text.
struct UriExpr {
  enum class Kind { kColumn, kText, kSlug, kHash, kNode };
  Kind kind = Kind::kText;
  std::string value;  // column name, text, or node role
  std::vector<UriExpr> args;
};

struct UriPart {
  bool literal = true;
  std::string text;
  UriExpr expr;
};

class UriTemplate {
 public:
  // Throws kParseError with the character offset of the problem.
  static UriTemplate parse(std::string_view source);

  const std::string& source() const { return source_; }
  const std::vector<UriPart>& parts() const { return parts_; }
  std::set<std::string> columns() const;

 private:
  std::string source_;
  std::vector<UriPart> parts_;
};

struct RowContext {
  std::string record_id;
  std::string table;
  std::size_t row = 0;
  // Raw value of a column in this row ("" when the cell is empty).
  std::function<std::string(const std::string&)> column;
};

struct UriEvalOptions {
  // Replace an empty slug() with hash() of the same argument instead of
  // throwing kEmptySlug.
  bool hash_fallback = false;
  std::vector<std::string>* warnings = nullptr;
};

std::string evaluate_tail(const UriTemplate& t, const RowContext& row,
                          const UriEvalOptions& options = {});

// prefix + "/" + type segment + "/" + evaluated tail.
std::string uri_template_eval(const UriTemplate& t, const RowContext& row, std::string_view prefix,
                              std::string_view type_segment, const UriEvalOptions& options = {});

// Deterministic identifier of an intermediate node of a record row.
std::string node_id(std::string_view record_id, std::string_view table, std::size_t row,
                    std::string_view role);

std::string percent_encode_iri(std::string_view raw);

}  // namespace archgraph
