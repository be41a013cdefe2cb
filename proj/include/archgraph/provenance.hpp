#pragma once

#include <optional>
#include <string>
#include <vector>

#include "archgraph/config.hpp"
#include "archgraph/graph_store.hpp"
#include "archgraph/record_store.hpp"

namespace archgraph {

struct ProvenanceEntry {
  std::string subject;  // the IRI whose anchor this is (a member local for masters)
  std::string record_iri;
  std::string record_id;
  std::optional<int> record_version;
  std::string table;
  std::size_t row = 0;
  std::vector<std::string> columns;
  std::vector<std::string> raw;  // verbatim cells, parallel to `columns`

  Json to_json() const;
  auto operator<=>(const ProvenanceEntry&) const = default;
};

// Resolves the provenance anchors of an IRI and dereferences them against
// the record store at the transformed record version. For master nodes the
// result is the union over their member locals. Throws kUnknownIri when the
// IRI occurs nowhere in the snapshot.
std::vector<ProvenanceEntry> provenance_of(const Snapshot& snapshot, const std::string& iri,
                                           const Config& config, const RecordStore& records);

}  // namespace archgraph
