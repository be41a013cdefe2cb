#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "archgraph/config.hpp"
#include "archgraph/curation_store.hpp"
#include "archgraph/graph_store.hpp"
#include "archgraph/mapping.hpp"
#include "archgraph/nquads.hpp"
#include "archgraph/ontology.hpp"
#include "archgraph/record_store.hpp"

namespace archgraph {

// Immutable copy of the curation state used by one transformation run.
struct CurationView {
  std::map<std::string, LocalInstance> locals;
  std::map<std::string, MasterInstance> masters;
  std::map<std::pair<std::string, std::string>, VocabularyTerm> terms;

  static CurationView of(const CurationStore& store);
};

// Masters that get a node in the curation-links graph: more than one member,
// or curated preferred values / enrichments.
bool master_is_emitted(const MasterInstance& master);
// Preferred value per role, falling back to the raw values of the smallest
// member local, joined with spaces.
std::string master_display_name(const MasterInstance& master, const CurationView& view);

// Deterministic IRI minting.
//
//   local   <prefix>/<type>/local/<local id>
//   master  <prefix>/<type>/<slug(display name)>   hash of the master id on
//                                                    collision or empty slug
//   term    <prefix>/term/<slug(vocabulary)>/<slug(raw)>   same fallback
//   anchor  <prefix>/provenance/<uuid>
//
// Collisions are resolved in id order: the smallest id keeps the slug.
class IriScheme {
 public:
  IriScheme(const Config& config, const CurationView& view);

  const Config& config() const { return *config_; }
  std::string local(const std::string& entity_type, const std::string& local_id) const;
  std::string master(const std::string& master_id) const;
  std::string term(const std::string& vocabulary, const std::string& raw) const;
  std::string anchor_node(const std::string& record_id, const std::string& table, std::size_t row,
                          const std::string& discriminator) const;

 private:
  const Config* config_;
  std::map<std::string, std::string> masters_;
  std::map<std::pair<std::string, std::string>, std::string> terms_;
};

struct RecordQuads {
  std::string record_id;
  std::vector<Quad> graph;       // the record's own named graph
  std::vector<Quad> provenance;  // this record's share of the provenance graph
  std::vector<std::string> warnings;

  bool operator==(const RecordQuads&) const = default;
};

struct TransformEnv {
  const Config* config = nullptr;
  const OntologySchema* ontology = nullptr;
  const IriScheme* iris = nullptr;
};

// Record, template, and mapping must agree on the template version
// (kVersionMismatch otherwise).
RecordQuads transform_record(const Record& record, int record_version, const Template& tmpl,
                             const MappingSpec& mapping, const TransformEnv& env);

struct RecordInput {
  Record record;
  int version = 0;
  const Template* tmpl = nullptr;
  const MappingSpec* mapping = nullptr;
};

// Serial reference and OpenMP-parallel per-record transformation; results are
// in input order and identical between the two.
std::vector<RecordQuads> transform_records_serial(const std::vector<RecordInput>& inputs,
                                                  const TransformEnv& env);
std::vector<RecordQuads> transform_records_parallel(const std::vector<RecordInput>& inputs,
                                                    const TransformEnv& env);

struct CurationQuads {
  std::vector<Quad> links;
  std::vector<Quad> hierarchy;
};

// `entity_classes` maps entity types to ontology classes for master nodes.
CurationQuads transform_curation(const CurationView& view, const IriScheme& iris,
                                 const std::map<std::string, std::string>& entity_classes,
                                 const std::string& term_class = "Concept");

// All pairs (a, c) such that c is reachable from a over one or more edges.
std::set<std::pair<std::string, std::string>> transitive_closure(
    const std::vector<std::pair<std::string, std::string>>& edges);

std::vector<Quad> materialise_hierarchy(const CurationView& view, const IriScheme& iris);

struct TransformScope {
  bool all = true;
  std::set<std::string> records;

  static TransformScope everything() { return {}; }
  static TransformScope only(std::set<std::string> ids) { return {false, std::move(ids)}; }
};

struct TransformReport {
  CommitId commit = 0;
  std::vector<std::string> records;
  std::map<std::string, std::size_t> graph_quads;  // graph IRI -> quads after commit
  std::vector<std::string> warnings;

  Json to_json() const;
};

// Transforms the published version of every in-scope record, rebuilds the
// dedicated graphs, and commits everything in one graph-store commit.
// `mappings` is keyed by template id. Throws kMissingMapping naming the
// template before anything is written.
TransformReport transform_all(const TransformScope& scope, const RecordStore& records,
                              const CurationStore& curation,
                              const std::map<std::string, MappingSpec>& mappings,
                              const OntologySchema& ontology, const Config& config,
                              GraphStore& graphs, bool parallel = true);

}  // namespace archgraph
