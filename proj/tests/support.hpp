#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <string>

#include "archgraph/workspace.hpp"

namespace archgraph::testing {

inline std::filesystem::path fixtures_dir() { return ARCHGRAPH_FIXTURES_DIR; }
inline std::filesystem::path maritime(const std::string& rel = "") { return fixtures_dir() / "maritime" / rel; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

Config maritime_config();

// Loads the maritime template, ontology, mapping, and records into `ws`
// (optionally only `record_ids`), publishing every record.
void load_maritime(Workspace& ws, const std::vector<std::string>& record_ids = {});

std::vector<MatchRule> maritime_rules();

// A ship-register record (template v1) with `crew` crew rows. Names, places
// and professions come from small pools so that matching finds duplicates;
// some cells are left empty or carry malformed dates.
Record synthetic_record(std::mt19937& rng, const std::string& id, int crew);

// Record store, curation store and graph store loaded with `n` synthetic
// records, all published, mentions ingested (no matching).
struct SyntheticCorpus {
  explicit SyntheticCorpus(const std::filesystem::path& dir, std::size_t n, std::uint32_t seed = 1, int crew = 4);
  Config config;
  OntologySchema ontology;
  std::map<std::string, MappingSpec> mappings;
  std::unique_ptr<RecordStore> records;
  std::unique_ptr<CurationStore> curation;
  std::unique_ptr<GraphStore> graphs;
};

}  // namespace archgraph::testing
