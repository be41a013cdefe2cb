#include "archgraph/provenance.hpp"

#include <algorithm>
#include <set>

#include "archgraph/error.hpp"

namespace archgraph {

namespace {

// Objects of (subject, predicate, ?o) in the given graph.
std::vector<std::string> objects(const QuadIndex& index, const std::string& subject, const std::string& predicate,
                                 const std::string& graph) {
  std::vector<std::string> out;
  for (uint32_t i : index.lookup(0, subject)) {
    const Quad& q = index.at(i);
    if (q.predicate == predicate && q.graph == graph) out.push_back(q.object);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string bare(const std::string& token) {
  return token.size() >= 2 && token.front() == '<' ? token.substr(1, token.size() - 2) : token;
}

}  // namespace

Json ProvenanceEntry::to_json() const {
  return {{"subject", subject},
          {"record", record_iri},
          {"record_id", record_id},
          {"record_version", record_version ? Json(*record_version) : Json(nullptr)},
          {"table", table},
          {"row", row},
          {"columns", columns},
          {"raw", raw}};
}

std::vector<ProvenanceEntry> provenance_of(const Snapshot& snapshot, const std::string& iri, const Config& config,
                                           const RecordStore& records) {
  const QuadIndex& index = snapshot.index();
  std::string token = iri_token(iri);
  if (index.lookup(0, token).empty() && index.lookup(2, token).empty()) {
    throw Error(ErrorCode::kUnknownIri, "IRI not present in the store: " + iri);
  }
  std::string prov_graph = iri_token(config.provenance_graph);
  auto pred = [&](const char* name) { return iri_token(config.artifact(name)); };

  std::set<std::string> subjects = {token};
  for (const auto& local : objects(index, token, pred(term::kSameIdentity), iri_token(config.curation_links_graph))) {
    subjects.insert(local);
  }

  std::vector<ProvenanceEntry> out;
  for (const auto& subject : subjects) {
    for (const auto& node : objects(index, subject, pred(term::kHasProvenance), prov_graph)) {
      ProvenanceEntry e;
      e.subject = bare(subject);
      auto rec = objects(index, node, pred(term::kFromRecord), prov_graph);
      auto table = objects(index, node, pred(term::kInTable), prov_graph);
      auto row = objects(index, node, pred(term::kAtRow), prov_graph);
      if (rec.size() != 1 || table.size() != 1 || row.size() != 1) {
        throw Error(ErrorCode::kInternal, "incomplete provenance anchor " + node);
      }
      e.record_iri = bare(rec[0]);
      e.table = parse_term(table[0]).value;
      e.row = std::stoul(parse_term(row[0]).value);
      for (const auto& c : objects(index, node, pred(term::kFromColumn), prov_graph)) {
        e.columns.push_back(parse_term(c).value);
      }
      auto ids = objects(index, rec[0], pred(term::kRecordId), prov_graph);
      e.record_id = ids.empty() ? std::string() : parse_term(ids[0]).value;
      auto versions = objects(index, rec[0], pred(term::kRecordVersion), prov_graph);
      if (!versions.empty()) e.record_version = std::stoi(parse_term(versions[0]).value);
      Anchor anchor{e.record_id, e.table, e.row, e.columns};
      if (auto raw = records.resolve_anchor(anchor, e.record_version)) e.raw = *raw;
      out.push_back(std::move(e));
    }
  }
  std::sort(out.begin(), out.end(), [](const ProvenanceEntry& a, const ProvenanceEntry& b) {
    return std::tie(a.record_id, a.table, a.row, a.subject, a.columns) <
           std::tie(b.record_id, b.table, b.row, b.subject, b.columns);
  });
  return out;
}

}  // namespace archgraph
