#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "archgraph/record_model.hpp"

namespace archgraph {

struct RecordVersion {
  std::string record_id;
  int version = 0;
  std::string timestamp;
  std::string author;
  std::string content_hash;  // SHA-256 hex of the canonical serialization

  bool operator==(const RecordVersion&) const = default;
};

struct PublishState {
  std::string record_id;
  std::optional<int> published_version;
};

// Versioned, append-only persistence of templates and records under one data
// directory:
//
//   <root>/templates/<template id>/<version>.json
//   <root>/records/<record id>/<version>.json
//   <root>/records/<record id>/meta.json      version history + publish state
//
// Single writer, many readers: every public member is safe to call
// concurrently.
class RecordStore {
 public:
  // Opens (creating if needed) the store under `root`. Throws kCorruptStore
  // naming the offending file when existing content does not load.
  RecordStore(std::filesystem::path root, std::set<std::string> entity_types);

  // Returns the stored version. Re-putting identical content is a no-op.
  int put_template(const Template& t);
  Template evolve_template(const std::string& id, const TemplateChange& change);
  Template get_template(const std::string& id, std::optional<int> version = {}) const;
  std::vector<std::string> template_ids() const;
  bool has_template(const std::string& id) const;

  RecordVersion put_record(const Record& record, const std::string& author = "");
  Record get_record(const std::string& id, std::optional<int> version = {}) const;
  std::vector<RecordVersion> versions(const std::string& id) const;
  std::vector<std::string> record_ids() const;

  // Marks the latest version published and returns its mentions.
  std::vector<Mention> publish_record(const std::string& id);
  PublishState publish_state(const std::string& id) const;
  // (record id, published version) for every published record, sorted by id.
  std::vector<std::pair<std::string, int>> published() const;

  // Raw values of the anchored cells at `version` (default: published, else
  // latest). Empty optional if the anchor does not resolve.
  std::optional<std::vector<std::string>> resolve_anchor(const Anchor& anchor,
                                                         std::optional<int> version = {}) const;

  // Imports every *.json record document in `dir` (sorted by file name).
  std::vector<RecordVersion> import_directory(const std::filesystem::path& dir,
                                              const std::string& author = "");

  const std::set<std::string>& entity_types() const { return entity_types_; }
  const std::filesystem::path& root() const { return root_; }

  void set_clock(std::function<std::string()> clock);

 private:
  struct Entry {
    std::vector<RecordVersion> history;
    std::vector<Record> contents;  // parallel to history
    std::optional<int> published_version;
  };

  void load();
  void write_meta(const std::string& id, const Entry& entry) const;
  const Entry& entry(const std::string& id) const;
  const Template& template_locked(const std::string& id, std::optional<int> version) const;

  std::filesystem::path root_;
  std::set<std::string> entity_types_;
  std::function<std::string()> clock_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::map<int, Template>> templates_;
  std::map<std::string, Entry> records_;
};

std::string utc_timestamp();

}  // namespace archgraph
