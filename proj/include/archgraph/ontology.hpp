#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "archgraph/canonical_io.hpp"

namespace archgraph {

enum class LiteralKind { kText, kInteger, kDecimal, kDate };

std::string literal_kind_name(LiteralKind kind);
std::optional<LiteralKind> parse_literal_kind(std::string_view name);
// XSD datatype IRI for the kind.
std::string literal_datatype(LiteralKind kind);

// Parses `raw` under a declared source format and returns the canonical
// lexical form (ISO-8601 dates, plain decimal numbers). Date formats:
// YYYY, YYYY-MM-DD, DD-MM-YYYY, DD/MM/YYYY, DD.MM.YYYY, MM-YYYY. Number
// formats: plain, comma-decimal.
std::optional<std::string> normalize_literal(LiteralKind kind, std::string_view format,
                                             std::string_view raw);
bool is_known_format(LiteralKind kind, std::string_view format);

struct OntologyClass {
  std::string name;
  std::optional<std::string> subclass_of;
};

struct PropertyRange {
  bool literal = true;
  LiteralKind kind = LiteralKind::kText;  // literal ranges
  std::string class_name;                 // class ranges

  std::string to_string() const;
};

struct OntologyProperty {
  std::string name;
  std::string domain;
  PropertyRange range;
};

struct OntologySchema {
  std::map<std::string, OntologyClass> classes;
  std::map<std::string, OntologyProperty> properties;

  // Reflexive, transitive subclass test.
  bool is_subclass(const std::string& sub, const std::string& super) const;
  bool has_class(const std::string& name) const { return classes.contains(name); }
  const OntologyProperty* property(const std::string& name) const;
};

// Throws kParseError (with line/column for syntax errors) or
// kCycleInSubclass.
OntologySchema parse_ontology(std::string_view document);
Json ontology_to_json(const OntologySchema& schema);

}  // namespace archgraph
