#pragma once

#include <filesystem>
#include <set>
#include <string>

#include "archgraph/canonical_io.hpp"

namespace archgraph {

// Well-known vocabularies.
namespace vocab {
inline constexpr const char* kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr const char* kRdfsLabel = "http://www.w3.org/2000/01/rdf-schema#label";
inline constexpr const char* kSkosPrefLabel = "http://www.w3.org/2004/02/skos/core#prefLabel";
inline constexpr const char* kSkosBroader = "http://www.w3.org/2004/02/skos/core#broader";
inline constexpr const char* kSkosBroaderTransitive =
    "http://www.w3.org/2004/02/skos/core#broaderTransitive";
inline constexpr const char* kXsdInteger = "http://www.w3.org/2001/XMLSchema#integer";
}  // namespace vocab

// Names in the artifact namespace.
namespace term {
inline constexpr const char* kHasProvenance = "has-provenance";
inline constexpr const char* kFromRecord = "from-record";
inline constexpr const char* kInTable = "in-table";
inline constexpr const char* kAtRow = "at-row";
inline constexpr const char* kFromColumn = "from-column";
inline constexpr const char* kRecordClass = "Record";
inline constexpr const char* kRecordId = "record-id";
inline constexpr const char* kRecordVersion = "record-version";
inline constexpr const char* kTemplate = "template";
inline constexpr const char* kTemplateVersion = "template-version";
inline constexpr const char* kSameIdentity = "same-identity";
inline constexpr const char* kEntityType = "entity-type";
inline constexpr const char* kInVocabulary = "in-vocabulary";
inline constexpr const char* kPreferred = "preferred/";
inline constexpr const char* kEnrichment = "enrichment/";
inline constexpr const char* kNormalized = "normalized/";
}  // namespace term

struct Config {
  std::string uri_prefix = "http://localhost/kb";
  std::string ontology_ns;  // default: <prefix>/ontology/
  std::string artifact_ns;  // default: <prefix>/ns/
  std::string record_graph_prefix;  // default: <prefix>/graph/record/
  std::string curation_links_graph;
  std::string term_hierarchy_graph;
  std::string materialised_graph;
  std::string provenance_graph;
  std::set<std::string> entity_types = {"legal-entity", "location", "person", "ship"};
  std::string address = "127.0.0.1";
  int port = 8080;

  Config();  // fills derived defaults from uri_prefix

  static Config from_json(const Json& doc);
  Json to_json() const;
  static Config load(const std::filesystem::path& path);

  std::string ontology(const std::string& name) const { return ontology_ns + name; }
  std::string artifact(const std::string& name) const { return artifact_ns + name; }
  std::string record_iri(const std::string& record_id) const;
  std::string record_graph(const std::string& record_id) const;
  // Record id for a record graph IRI, empty if `graph` is not one.
  std::string record_of_graph(const std::string& graph) const;
  std::set<std::string> dedicated_graphs() const;

 private:
  void derive_defaults();
};

}  // namespace archgraph
