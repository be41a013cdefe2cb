#include "archgraph/config.hpp"

#include "archgraph/error.hpp"

namespace archgraph {

namespace {

void strip_trailing_slash(std::string& s) {
  while (!s.empty() && s.back() == '/') s.pop_back();
}

}  // namespace

Config::Config() { derive_defaults(); }

void Config::derive_defaults() {
  strip_trailing_slash(uri_prefix);
  if (ontology_ns.empty()) ontology_ns = uri_prefix + "/ontology/";
  if (artifact_ns.empty()) artifact_ns = uri_prefix + "/ns/";
  if (record_graph_prefix.empty()) record_graph_prefix = uri_prefix + "/graph/record/";
  if (curation_links_graph.empty()) curation_links_graph = uri_prefix + "/graph/curation-links";
  if (term_hierarchy_graph.empty()) term_hierarchy_graph = uri_prefix + "/graph/term-hierarchy";
  if (materialised_graph.empty()) materialised_graph = uri_prefix + "/graph/materialised";
  if (provenance_graph.empty()) provenance_graph = uri_prefix + "/graph/provenance";
}

Config Config::from_json(const Json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kParseError, "config must be an object");
  Config c;
  c.ontology_ns.clear();
  c.artifact_ns.clear();
  c.record_graph_prefix.clear();
  c.curation_links_graph.clear();
  c.term_hierarchy_graph.clear();
  c.materialised_graph.clear();
  c.provenance_graph.clear();
  auto str = [&](const Json& obj, const char* key, std::string& out) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_string()) throw Error(ErrorCode::kParseError, std::string("config: '") + key + "' must be a string");
    out = obj[key].get<std::string>();
  };
  str(doc, "uri_prefix", c.uri_prefix);
  if (doc.contains("namespaces")) {
    str(doc["namespaces"], "ontology", c.ontology_ns);
    str(doc["namespaces"], "artifact", c.artifact_ns);
  }
  if (doc.contains("graphs")) {
    const auto& g = doc["graphs"];
    str(g, "record_prefix", c.record_graph_prefix);
    str(g, "curation_links", c.curation_links_graph);
    str(g, "term_hierarchy", c.term_hierarchy_graph);
    str(g, "materialised", c.materialised_graph);
    str(g, "provenance", c.provenance_graph);
  }
  if (doc.contains("entity_types")) {
    if (!doc["entity_types"].is_array()) throw Error(ErrorCode::kParseError, "config: 'entity_types' must be an array");
    c.entity_types.clear();
    for (const auto& t : doc["entity_types"]) c.entity_types.insert(t.get<std::string>());
  }
  str(doc, "address", c.address);
  if (doc.contains("port")) {
    if (!doc["port"].is_number_integer()) throw Error(ErrorCode::kParseError, "config: 'port' must be an integer");
    c.port = doc["port"].get<int>();
  }
  if (c.uri_prefix.empty()) throw Error(ErrorCode::kParseError, "config: 'uri_prefix' must not be empty");
  c.derive_defaults();
  return c;
}

Json Config::to_json() const {
  return {{"format_version", 1},
          {"uri_prefix", uri_prefix},
          {"namespaces", {{"ontology", ontology_ns}, {"artifact", artifact_ns}}},
          {"graphs",
           {{"record_prefix", record_graph_prefix},
            {"curation_links", curation_links_graph},
            {"term_hierarchy", term_hierarchy_graph},
            {"materialised", materialised_graph},
            {"provenance", provenance_graph}}},
          {"entity_types", entity_types},
          {"address", address},
          {"port", port}};
}

Config Config::load(const std::filesystem::path& path) {
  return from_json(parse_document(read_file(path), path.string()));
}

std::string Config::record_iri(const std::string& record_id) const {
  return uri_prefix + "/record/" + record_id;
}

std::string Config::record_graph(const std::string& record_id) const {
  return record_graph_prefix + record_id;
}

std::string Config::record_of_graph(const std::string& graph) const {
  if (graph.size() <= record_graph_prefix.size() || graph.compare(0, record_graph_prefix.size(), record_graph_prefix) != 0) {
    return {};
  }
  return graph.substr(record_graph_prefix.size());
}

std::set<std::string> Config::dedicated_graphs() const {
  return {curation_links_graph, term_hierarchy_graph, materialised_graph, provenance_graph};
}

}  // namespace archgraph
