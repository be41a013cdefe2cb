#pragma once

#include <optional>
#include <string>
#include <vector>

#include "archgraph/config.hpp"
#include "archgraph/curation_store.hpp"
#include "archgraph/graph_store.hpp"
#include "archgraph/mapping.hpp"
#include "archgraph/ontology.hpp"
#include "archgraph/record_model.hpp"

namespace archgraph {

struct ColumnCompleteness {
  std::string template_id;
  std::string table;
  std::string column;
  std::size_t filled = 0;
  std::size_t total = 0;

  // Empty when the column has no rows ("no data").
  std::optional<double> rate() const;
  Json to_json() const;
};

struct FormatConsistency {
  DeclaredFormat format;
  std::size_t parsed = 0;
  std::size_t total = 0;      // non-empty cells
  std::vector<Anchor> failures;

  std::optional<double> rate() const;
  Json to_json() const;
};

struct SchemaViolation {
  Quad quad;
  std::string property;
  std::string rule;  // "domain" or "range"
  std::string message;

  auto operator<=>(const SchemaViolation&) const = default;
  Json to_json() const;
};

struct DuplicateCandidate {
  std::string entity_type;
  std::string master_a;  // master_a < master_b
  std::string master_b;
  std::vector<std::string> key;

  auto operator<=>(const DuplicateCandidate&) const = default;
  Json to_json() const;
};

// Heuristic schema-level conciseness: two properties with identical domain
// and range whose names coincide after normalisation.
struct PropertyWarning {
  std::string property_a;
  std::string property_b;
  std::string message;

  Json to_json() const;
};

struct QualityReport {
  std::vector<ColumnCompleteness> completeness;
  std::vector<FormatConsistency> value_consistency;
  std::vector<SchemaViolation> schema_consistency;
  std::vector<DuplicateCandidate> conciseness;
  std::vector<PropertyWarning> property_warnings;

  Json to_json() const;
  std::string to_text() const;
};

// Fill rates over the live rows of `records` (which must use `tmpl`'s
// template id; aliased columns are resolved).
std::vector<ColumnCompleteness> completeness_report(const std::vector<Record>& records, const Template& tmpl);

std::vector<SchemaViolation> schema_consistency(const Snapshot& snapshot, const OntologySchema& ontology,
                                                const Config& config);

// Parse rates of every declared-format column over `records`.
std::vector<FormatConsistency> value_consistency(const std::vector<Record>& records,
                                                 const std::vector<DeclaredFormat>& formats);

std::vector<DuplicateCandidate> conciseness_report(const CurationStore& curation,
                                                   const std::vector<MatchRule>& rules);

std::vector<PropertyWarning> property_warnings(const OntologySchema& ontology);

}  // namespace archgraph
