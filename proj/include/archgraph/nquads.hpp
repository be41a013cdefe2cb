#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace archgraph {

// An RDF term. Quads store terms in their canonical N-Quads token form, so
// term equality is string equality.
struct Term {
  enum class Kind { kIri, kLiteral, kBlank };
  Kind kind = Kind::kIri;
  std::string value;     // IRI, lexical form, or blank label
  std::string datatype;  // literals; empty for plain strings
  std::string language;  // literals with a language tag

  static Term iri(std::string value) { return {Kind::kIri, std::move(value), {}, {}}; }
  static Term literal(std::string value, std::string datatype = {}) {
    return {Kind::kLiteral, std::move(value), std::move(datatype), {}};
  }

  std::string token() const;
  bool operator==(const Term&) const = default;
};

std::string iri_token(std::string_view iri);
std::string literal_token(std::string_view value, std::string_view datatype = {});
std::string escape_literal(std::string_view value);

// Parses a single canonical or permissive token. Throws kParseError.
Term parse_term(std::string_view token);

struct Quad {
  std::string subject;
  std::string predicate;
  std::string object;
  std::string graph;

  std::string line() const;  // "<s> <p> o <g> ."
  auto operator<=>(const Quad&) const = default;
};

Quad make_quad(std::string_view subject_iri, std::string_view predicate_iri, const Term& object,
               std::string_view graph_iri);

// Parses N-Quads, accepting arbitrary whitespace between terms and blank or
// comment lines. Every quad must name a graph. Errors carry the line number.
std::vector<Quad> parse_nquads(std::string_view text);

// Canonical serialization: one line per distinct quad, sorted bytewise, LF.
std::string serialize_nquads(std::vector<Quad> quads);

}  // namespace archgraph
