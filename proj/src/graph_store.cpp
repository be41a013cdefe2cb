#include "archgraph/graph_store.hpp"

#include <algorithm>
#include <fstream>

#include "archgraph/canonical_io.hpp"
#include "archgraph/error.hpp"

namespace archgraph {

namespace fs = std::filesystem;

namespace {

constexpr uintmax_t kCheckpointThreshold = 8u << 20;

const std::vector<uint32_t>& empty_list() {
  static const std::vector<uint32_t> empty;
  return empty;
}

std::string_view position(const Quad& q, int pos) {
  switch (pos) {
    case 0: return q.subject;
    case 1: return q.predicate;
    case 2: return q.object;
    default: return q.graph;
  }
}

Snapshot::Graph normalize(std::vector<Quad> quads) {
  std::sort(quads.begin(), quads.end());
  quads.erase(std::unique(quads.begin(), quads.end()), quads.end());
  return std::make_shared<const std::vector<Quad>>(std::move(quads));
}

// Parses "<iri>" returning the bare IRI.
std::string bare_iri(const std::string& token) {
  if (token.size() < 2 || token.front() != '<' || token.back() != '>') return {};
  return token.substr(1, token.size() - 2);
}

}  // namespace

QuadIndex::QuadIndex(const std::vector<const Quad*>& quads) : quads_(quads) {
  for (uint32_t i = 0; i < quads_.size(); ++i) {
    for (int pos = 0; pos < 4; ++pos) by_[pos][position(*quads_[i], pos)].push_back(i);
  }
}

const std::vector<uint32_t>& QuadIndex::lookup(int pos, std::string_view token) const {
  auto it = by_[pos].find(token);
  return it == by_[pos].end() ? empty_list() : it->second;
}

Snapshot::Snapshot(CommitId commit, std::map<std::string, Graph> graphs)
    : commit_(commit), graphs_(std::move(graphs)) {}

size_t Snapshot::size() const {
  size_t n = 0;
  for (const auto& [_, g] : graphs_) n += g->size();
  return n;
}

const QuadIndex& Snapshot::index() const {
  std::call_once(index_once_, [this] {
    std::vector<const Quad*> all;
    all.reserve(size());
    for (const auto& [_, g] : graphs_) {
      for (const auto& q : *g) all.push_back(&q);
    }
    index_ = std::make_unique<QuadIndex>(all);
  });
  return *index_;
}

std::string Snapshot::export_nquads(const std::set<std::string>& scope) const {
  std::vector<std::string> lines;
  for (const auto& [iri, g] : graphs_) {
    if (!scope.empty() && !scope.count(iri)) continue;
    for (const auto& q : *g) lines.push_back(q.line());
  }
  std::sort(lines.begin(), lines.end());
  size_t total = 0;
  for (const auto& l : lines) total += l.size() + 1;
  std::string out;
  out.reserve(total);
  for (const auto& l : lines) {
    out += l;
    out.push_back('\n');
  }
  return out;
}

GraphStore::GraphStore() : current_(std::make_shared<Snapshot>(0, std::map<std::string, Snapshot::Graph>{})) {}

GraphStore::GraphStore(fs::path dir) : GraphStore() {
  dir_ = std::move(dir);
  std::error_code ec;
  fs::create_directories(*dir_, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir_->string() + ": " + ec.message());
  recover();
}

std::shared_ptr<const Snapshot> GraphStore::snapshot() const {
  std::lock_guard lock(read_mutex_);
  return current_;
}

CommitId GraphStore::replace_graph(const std::string& graph_iri, std::vector<Quad> quads) {
  std::vector<std::pair<std::string, std::vector<Quad>>> batch;
  batch.emplace_back(graph_iri, std::move(quads));
  return replace_graphs(std::move(batch));
}

CommitId GraphStore::replace_graphs(std::vector<std::pair<std::string, std::vector<Quad>>> batch) {
  std::vector<std::pair<std::string, Snapshot::Graph>> changes;
  std::set<std::string> seen;
  for (auto& [iri, quads] : batch) {
    if (!seen.insert(iri).second) {
      throw Error(ErrorCode::kGraphMismatch, "graph <" + iri + "> appears twice in one commit");
    }
    std::string token = iri_token(iri);
    for (const auto& q : quads) {
      if (q.graph != token) {
        throw Error(ErrorCode::kGraphMismatch,
                    "quad in graph " + q.graph + " submitted for graph " + token);
      }
    }
    changes.emplace_back(iri, normalize(std::move(quads)));
  }

  std::lock_guard write(write_mutex_);
  auto base = snapshot();
  CommitId commit = base->commit() + 1;
  auto graphs = base->graphs();
  for (const auto& [iri, g] : changes) {
    if (g->empty()) graphs.erase(iri);
    else graphs[iri] = g;
  }
  if (dir_) append_wal(commit, changes);
  auto next = std::make_shared<Snapshot>(commit, std::move(graphs));
  {
    std::lock_guard lock(read_mutex_);
    current_ = std::move(next);
  }
  if (dir_ && wal_bytes_ > kCheckpointThreshold) checkpoint();
  return commit;
}

size_t GraphStore::import_nquads(std::string_view text) {
  auto quads = parse_nquads(text);
  size_t count = quads.size();
  std::map<std::string, std::vector<Quad>> by_graph;
  for (auto& q : quads) {
    std::string iri = bare_iri(q.graph);
    if (iri.empty()) throw Error(ErrorCode::kParseError, "graph term must be an IRI: " + q.graph);
    by_graph[iri].push_back(std::move(q));
  }
  std::lock_guard write(write_mutex_);
  auto base = snapshot();
  std::vector<std::pair<std::string, Snapshot::Graph>> changes;
  auto graphs = base->graphs();
  for (auto& [iri, added] : by_graph) {
    auto it = graphs.find(iri);
    if (it != graphs.end()) added.insert(added.end(), it->second->begin(), it->second->end());
    auto g = normalize(std::move(added));
    graphs[iri] = g;
    changes.emplace_back(iri, g);
  }
  CommitId commit = base->commit() + 1;
  if (dir_) append_wal(commit, changes);
  auto next = std::make_shared<Snapshot>(commit, std::move(graphs));
  {
    std::lock_guard lock(read_mutex_);
    current_ = std::move(next);
  }
  return count;
}

std::string GraphStore::export_nquads(const std::set<std::string>& scope) const {
  return snapshot()->export_nquads(scope);
}

void GraphStore::append_wal(CommitId commit,
                            const std::vector<std::pair<std::string, Snapshot::Graph>>& changes) {
  std::string out = "BEGIN " + std::to_string(commit) + "\n";
  for (const auto& [iri, g] : changes) {
    out += "GRAPH " + iri_token(iri) + " " + std::to_string(g->size()) + "\n";
    for (const auto& q : *g) {
      out += q.line();
      out.push_back('\n');
    }
  }
  out += "END " + std::to_string(commit) + "\n";
  fs::path wal = *dir_ / "wal.nq";
  std::ofstream f(wal, std::ios::binary | std::ios::app);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  f.flush();
  if (!f) throw Error(ErrorCode::kIo, "cannot append to " + wal.string());
  wal_bytes_ += out.size();
}

void GraphStore::checkpoint() {
  if (!dir_) return;
  auto snap = snapshot();
  std::string body = "# commit " + std::to_string(snap->commit()) + "\n" + snap->export_nquads();
  write_file_atomic(*dir_ / "snapshot.nq", body);
  std::error_code ec;
  fs::remove(*dir_ / "wal.nq", ec);
  wal_bytes_ = 0;
}

void GraphStore::recover() {
  std::map<std::string, Snapshot::Graph> graphs;
  CommitId commit = 0;

  fs::path snap_path = *dir_ / "snapshot.nq";
  if (fs::exists(snap_path)) {
    std::string text = read_file(snap_path);
    const std::string header = "# commit ";
    size_t eol = text.find('\n');
    if (text.compare(0, header.size(), header) != 0 || eol == std::string::npos) {
      throw Error(ErrorCode::kCorruptStore, snap_path.string() + ": missing commit header");
    }
    try {
      commit = std::stoull(text.substr(header.size(), eol - header.size()));
      std::map<std::string, std::vector<Quad>> by_graph;
      for (auto& q : parse_nquads(std::string_view(text).substr(eol + 1))) {
        by_graph[bare_iri(q.graph)].push_back(std::move(q));
      }
      for (auto& [iri, quads] : by_graph) graphs[iri] = normalize(std::move(quads));
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kCorruptStore, snap_path.string() + ": " + e.what());
    }
  }

  fs::path wal_path = *dir_ / "wal.nq";
  if (fs::exists(wal_path)) {
    std::string text = read_file(wal_path);
    size_t pos = 0;
    size_t good_end = 0;
    auto next_line = [&](std::string& line) {
      if (pos >= text.size()) return false;
      size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) return false;  // torn final line
      line = text.substr(pos, eol - pos);
      pos = eol + 1;
      return true;
    };
    auto corrupt = [&](const std::string& msg) {
      return Error(ErrorCode::kCorruptStore, wal_path.string() + ": " + msg);
    };
    std::string line;
    while (next_line(line)) {
      if (line.rfind("BEGIN ", 0) != 0) throw corrupt("expected BEGIN at byte " + std::to_string(good_end));
      CommitId tx = 0;
      try {
        tx = std::stoull(line.substr(6));
      } catch (const std::exception&) {
        throw corrupt("bad commit id at byte " + std::to_string(good_end));
      }
      std::vector<std::pair<std::string, Snapshot::Graph>> changes;
      bool complete = false;
      bool torn = false;
      while (true) {
        if (!next_line(line)) {
          torn = true;
          break;
        }
        if (line.rfind("END ", 0) == 0) {
          complete = true;
          break;
        }
        if (line.rfind("GRAPH ", 0) != 0) throw corrupt("expected GRAPH in commit " + std::to_string(tx));
        size_t sp = line.rfind(' ');
        std::string iri = bare_iri(line.substr(6, sp - 6));
        size_t n = 0;
        try {
          n = std::stoull(line.substr(sp + 1));
        } catch (const std::exception&) {
          throw corrupt("bad quad count in commit " + std::to_string(tx));
        }
        std::string chunk;
        size_t read = 0;
        for (; read < n && next_line(line); ++read) {
          chunk += line;
          chunk.push_back('\n');
        }
        if (read < n) {
          torn = true;
          break;
        }
        try {
          changes.emplace_back(iri, normalize(parse_nquads(chunk)));
        } catch (const Error& e) {
          throw corrupt(std::string("commit ") + std::to_string(tx) + ": " + e.what());
        }
      }
      if (torn || !complete) break;
      good_end = pos;
      if (tx <= commit) continue;  // already folded into the snapshot
      for (auto& [iri, g] : changes) {
        if (g->empty()) graphs.erase(iri);
        else graphs[iri] = g;
      }
      commit = tx;
    }
    if (good_end < text.size()) {
      // Drop a torn tail so later appends start on a clean boundary.
      fs::resize_file(wal_path, good_end);
    }
    wal_bytes_ = good_end;
  }
  current_ = std::make_shared<Snapshot>(commit, std::move(graphs));
}

}  // namespace archgraph
