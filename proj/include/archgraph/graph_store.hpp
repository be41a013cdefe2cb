#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "archgraph/nquads.hpp"

namespace archgraph {

using CommitId = uint64_t;

// Positional index over all quads of a snapshot. Entries are indexes into
// `quads`, which points into graph vectors owned by the snapshot.
class QuadIndex {
 public:
  explicit QuadIndex(const std::vector<const Quad*>& quads);

  const std::vector<const Quad*>& all() const { return quads_; }
  // Quads whose given position equals `token`. Position: 0=s 1=p 2=o 3=g.
  const std::vector<uint32_t>& lookup(int position, std::string_view token) const;
  const Quad& at(uint32_t i) const { return *quads_[i]; }

 private:
  std::vector<const Quad*> quads_;
  std::unordered_map<std::string_view, std::vector<uint32_t>> by_[4];
};

// Immutable view of the store at one commit.
class Snapshot {
 public:
  using Graph = std::shared_ptr<const std::vector<Quad>>;  // sorted, distinct

  Snapshot(CommitId commit, std::map<std::string, Graph> graphs);

  CommitId commit() const { return commit_; }
  // Keyed by graph IRI (without angle brackets).
  const std::map<std::string, Graph>& graphs() const { return graphs_; }
  size_t size() const;
  const QuadIndex& index() const;  // built lazily, thread-safe

  // Empty scope exports every graph.
  std::string export_nquads(const std::set<std::string>& scope = {}) const;

 private:
  CommitId commit_;
  std::map<std::string, Graph> graphs_;
  mutable std::once_flag index_once_;
  mutable std::unique_ptr<QuadIndex> index_;
};

// Named-graph quad store with snapshot reads and write-ahead persistence.
//
// Writers are serialized; each commit publishes a new immutable snapshot, so
// readers always observe a whole commit. When opened on a directory every
// commit is appended to `wal.nq` before it becomes visible and the log is
// periodically folded into `snapshot.nq`.
class GraphStore {
 public:
  GraphStore();  // in-memory only
  explicit GraphStore(std::filesystem::path dir);

  std::shared_ptr<const Snapshot> snapshot() const;

  // Replaces the content of one graph. Every quad must carry `graph_iri`.
  CommitId replace_graph(const std::string& graph_iri, std::vector<Quad> quads);
  // Replaces several graphs in one atomic commit.
  CommitId replace_graphs(std::vector<std::pair<std::string, std::vector<Quad>>> batch);
  // Adds quads (set semantics) and returns how many were parsed.
  size_t import_nquads(std::string_view text);

  std::string export_nquads(const std::set<std::string>& scope = {}) const;

  // Folds the write-ahead log into the snapshot file.
  void checkpoint();

 private:
  void recover();
  void append_wal(CommitId commit,
                  const std::vector<std::pair<std::string, Snapshot::Graph>>& changes);

  std::optional<std::filesystem::path> dir_;
  mutable std::mutex read_mutex_;
  std::mutex write_mutex_;
  std::shared_ptr<const Snapshot> current_;
  uintmax_t wal_bytes_ = 0;
};

}  // namespace archgraph
