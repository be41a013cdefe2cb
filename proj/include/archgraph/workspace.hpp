#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "archgraph/config.hpp"
#include "archgraph/curation_store.hpp"
#include "archgraph/graph_store.hpp"
#include "archgraph/mapping.hpp"
#include "archgraph/ontology.hpp"
#include "archgraph/provenance.hpp"
#include "archgraph/quality.hpp"
#include "archgraph/query.hpp"
#include "archgraph/record_store.hpp"
#include "archgraph/transform.hpp"

namespace archgraph {

// Exclusive advisory lock on a data directory (the LOCK file). Throws
// kLocked when another holder exists.
class DirectoryLock {
 public:
  explicit DirectoryLock(const std::filesystem::path& dir);
  ~DirectoryLock();
  DirectoryLock(const DirectoryLock&) = delete;
  DirectoryLock& operator=(const DirectoryLock&) = delete;

 private:
  int fd_ = -1;
};

// One data directory with every store opened:
//
//   <dir>/config.json
//   <dir>/ontology.json
//   <dir>/mappings/<template id>.json
//   <dir>/templates/, <dir>/records/     record store
//   <dir>/curation/state.json
//   <dir>/graph/snapshot.nq, wal.nq      graph store
//   <dir>/LOCK
//
// Operations are safe to call from several threads; mutations of one store
// are serialized.
class Workspace {
 public:
  // Opens `dir`, creating the layout (and config.json from `config` or the
  // defaults) when absent. Throws kCorruptStore naming the offending file.
  explicit Workspace(std::filesystem::path dir, std::optional<Config> config = {});

  const std::filesystem::path& dir() const { return dir_; }
  const Config& config() const { return config_; }
  RecordStore& records() { return *records_; }
  const RecordStore& records() const { return *records_; }
  CurationStore& curation() { return *curation_; }
  const CurationStore& curation() const { return *curation_; }
  GraphStore& graphs() { return *graphs_; }
  const GraphStore& graphs() const { return *graphs_; }

  Template import_template(std::string_view document);
  Template evolve_template(const std::string& id, const TemplateChange& change);
  RecordVersion import_record(std::string_view document, const std::string& author = "");
  // A record file or a directory of *.json records.
  std::vector<RecordVersion> import_records(const std::filesystem::path& path, const std::string& author = "");
  OntologySchema import_ontology(std::string_view document);
  // Stores the mapping when it validates; otherwise stores nothing and
  // returns the report.
  ValidationReport import_mapping(std::string_view document);

  IngestReport publish(const std::string& record_id);

  MatchReport auto_match(const std::vector<MatchRule>& rules);
  std::string manual_match(const std::set<std::string>& ids);
  std::string unmatch(const std::string& local_id);
  MasterInstance set_preferred(const std::string& master_id, const std::string& role, const std::string& value);
  MasterInstance set_enrichment(const std::string& master_id, const std::string& key, const std::string& value);
  VocabularyTerm set_preferred_term(const std::string& vocabulary, const std::string& raw, const std::string& preferred);
  VocabularyTerm set_broader(const std::string& vocabulary, const std::string& raw, const std::string& broader);

  TransformReport transform(const TransformScope& scope, bool parallel = true);

  ResultTable query(const Json& document) const;
  std::string export_nquads(const std::set<std::string>& graphs = {}) const;
  std::size_t import_nquads(std::string_view text);
  std::vector<ProvenanceEntry> provenance(const std::string& iri) const;
  // Conciseness uses `rules`, defaulting to the rules of the last auto-match.
  QualityReport quality(const std::optional<std::vector<MatchRule>>& rules = {}) const;

  OntologySchema ontology() const;
  std::map<std::string, MappingSpec> mappings() const;

 private:
  void save_curation();
  std::vector<Record> published_records(const std::string& template_id, int template_version) const;

  std::filesystem::path dir_;
  Config config_;
  std::unique_ptr<RecordStore> records_;
  std::unique_ptr<CurationStore> curation_;
  std::unique_ptr<GraphStore> graphs_;

  mutable std::shared_mutex schema_mutex_;  // ontology_, mappings_
  OntologySchema ontology_;
  std::map<std::string, MappingSpec> mappings_;

  std::mutex curation_write_;
  std::mutex transform_mutex_;
};

}  // namespace archgraph
