#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "archgraph/ontology.hpp"
#include "archgraph/record_model.hpp"
#include "archgraph/uri_template.hpp"

namespace archgraph {

enum class LinkTarget { kLiteral, kEntity, kVocabTerm, kEntityRef };

std::string link_target_name(LinkTarget target);

struct EntityMap;

struct LinkSpec {
  std::string property;
  LinkTarget target = LinkTarget::kLiteral;
  std::string column;  // all targets except kEntity
  // Literal links: kind defaults to the property's literal range; a declared
  // source format adds a normalised companion value.
  std::optional<LiteralKind> literal_kind;
  std::optional<std::string> source_format;
  std::string entity_type;             // kEntityRef
  std::shared_ptr<EntityMap> nested;   // kEntity
};

// Maps the rows of one table to instances of one class. The subject is
// either the local instance of an entity-ref column group in the row
// (`local_group`) or an IRI minted by `uri`.
struct EntityMap {
  std::string id;
  std::string table;
  std::string class_name;
  std::optional<std::string> local_group;
  std::optional<UriTemplate> uri;
  std::vector<LinkSpec> links;
};

struct MappingSpec {
  std::string template_id;
  int template_version = 1;
  std::map<std::string, std::string> entity_classes;  // entity type -> class
  std::string term_class = "Concept";
  std::vector<EntityMap> entities;
};

struct ValidationIssue {
  std::string location;
  std::string rule;  // UnknownTable, UnknownColumn, DomainViolation, ...
  std::string message;

  bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool has_rule(std::string_view rule) const;
  Json to_json() const;
};

// Syntax-level parse (no ontology/template checks). Throws kParseError.
MappingSpec parse_mapping_document(std::string_view document);
Json mapping_to_json(const MappingSpec& spec);
std::string serialize_mapping(const MappingSpec& spec);

ValidationReport validate_mapping(const MappingSpec& spec, const OntologySchema& ontology,
                                  const Template& tmpl);

// Either a fully validated spec or the report listing every violation.
std::variant<MappingSpec, ValidationReport> parse_mapping(std::string_view document,
                                                          const OntologySchema& ontology,
                                                          const Template& tmpl);

// A column with a declared source format, as used by value-consistency
// reporting.
struct DeclaredFormat {
  std::string template_id;
  std::string table;
  std::string column;
  LiteralKind kind = LiteralKind::kDate;
  std::string format;

  auto operator<=>(const DeclaredFormat&) const = default;
};

std::vector<DeclaredFormat> declared_formats(const MappingSpec& spec,
                                             const OntologySchema& ontology);

}  // namespace archgraph
