#include "archgraph/quality.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>

#include "archgraph/text.hpp"

namespace archgraph {

namespace {

Json rate_json(const std::optional<double>& r) { return r ? Json(*r) : Json("no data"); }

std::string format_rate(const std::optional<double>& r) {
  if (!r) return "no data";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", *r);
  return buf;
}

// Classes asserted for a subject token through rdf:type in any graph.
std::vector<std::string> declared_types(const QuadIndex& index, const std::string& subject, const std::string& rdf_type,
                                        const std::string& ontology_ns) {
  std::vector<std::string> out;
  for (uint32_t i : index.lookup(0, subject)) {
    const Quad& q = index.at(i);
    if (q.predicate != rdf_type) continue;
    if (q.object.size() > ontology_ns.size() + 2 && q.object.compare(1, ontology_ns.size(), ontology_ns) == 0) {
      out.push_back(q.object.substr(1 + ontology_ns.size(), q.object.size() - 2 - ontology_ns.size()));
    }
  }
  return out;
}

std::string normalized_property_name(const std::string& name) {
  std::string s;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c))) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (const char* prefix : {"has", "is"}) {
    std::string p(prefix);
    if (s.size() > p.size() && s.compare(0, p.size(), p) == 0) return s.substr(p.size());
  }
  return s;
}

}  // namespace

std::optional<double> ColumnCompleteness::rate() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(filled) / static_cast<double>(total);
}

Json ColumnCompleteness::to_json() const {
  return {{"template", template_id}, {"table", table}, {"column", column},
          {"filled", filled},        {"total", total}, {"rate", rate_json(rate())}};
}

std::optional<double> FormatConsistency::rate() const {
  if (total == 0) return std::nullopt;
  return static_cast<double>(parsed) / static_cast<double>(total);
}

Json FormatConsistency::to_json() const {
  Json failed = Json::array();
  for (const auto& a : failures) failed.push_back(anchor_to_json(a));
  return {{"template", format.template_id},
          {"table", format.table},
          {"column", format.column},
          {"kind", literal_kind_name(format.kind)},
          {"format", format.format},
          {"parsed", parsed},
          {"total", total},
          {"rate", rate_json(rate())},
          {"failures", failed}};
}

Json SchemaViolation::to_json() const {
  return {{"quad", quad.line()}, {"property", property}, {"rule", rule}, {"message", message}};
}

Json DuplicateCandidate::to_json() const {
  return {{"entity_type", entity_type}, {"masters", {master_a, master_b}}, {"key", key}};
}

Json PropertyWarning::to_json() const {
  return {{"properties", {property_a, property_b}}, {"message", message}};
}

Json QualityReport::to_json() const {
  Json j;
  j["completeness"] = Json::array();
  for (const auto& c : completeness) j["completeness"].push_back(c.to_json());
  j["value_consistency"] = Json::array();
  for (const auto& c : value_consistency) j["value_consistency"].push_back(c.to_json());
  j["schema_consistency"] = Json::array();
  for (const auto& v : schema_consistency) j["schema_consistency"].push_back(v.to_json());
  j["conciseness"] = Json::array();
  for (const auto& d : conciseness) j["conciseness"].push_back(d.to_json());
  j["property_warnings"] = Json::array();
  for (const auto& w : property_warnings) j["property_warnings"].push_back(w.to_json());
  return j;
}

std::string QualityReport::to_text() const {
  std::string out = "completeness\n";
  for (const auto& c : completeness) {
    out += "  " + c.template_id + "/" + c.table + "." + c.column + "  " + std::to_string(c.filled) + "/" +
           std::to_string(c.total) + "  " + format_rate(c.rate()) + "\n";
  }
  out += "value consistency\n";
  for (const auto& c : value_consistency) {
    out += "  " + c.format.template_id + "/" + c.format.table + "." + c.format.column + " [" + c.format.format +
           "]  " + std::to_string(c.parsed) + "/" + std::to_string(c.total) + "  " + format_rate(c.rate()) + "\n";
  }
  out += "schema consistency: " + std::to_string(schema_consistency.size()) + " violation(s)\n";
  for (const auto& v : schema_consistency) out += "  " + v.rule + " " + v.property + ": " + v.quad.line() + "\n";
  out += "conciseness: " + std::to_string(conciseness.size()) + " candidate pair(s)\n";
  for (const auto& d : conciseness) {
    out += "  " + d.entity_type + " " + d.master_a + " " + d.master_b + " [" + text::join(d.key, ", ") + "]\n";
  }
  if (!property_warnings.empty()) {
    out += "property warnings\n";
    for (const auto& w : property_warnings) out += "  " + w.message + "\n";
  }
  return out;
}

std::vector<ColumnCompleteness> completeness_report(const std::vector<Record>& records, const Template& tmpl) {
  std::vector<ColumnCompleteness> out;
  for (const auto& ts : tmpl.tables) {
    for (const auto& col : ts.columns) {
      ColumnCompleteness c{tmpl.id, ts.name, col.name, 0, 0};
      for (const auto& r : records) {
        if (r.template_id != tmpl.id) continue;
        auto it = r.tables.find(ts.name);
        if (it == r.tables.end()) continue;
        for (const auto& row : it->second) {
          if (row.deleted) continue;
          ++c.total;
          const Cell* cell = row.cell(col);
          if (cell && !cell->empty()) ++c.filled;
        }
      }
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<SchemaViolation> schema_consistency(const Snapshot& snapshot, const OntologySchema& ontology,
                                                const Config& config) {
  const QuadIndex& index = snapshot.index();
  const std::string rdf_type = iri_token(vocab::kRdfType);
  std::vector<SchemaViolation> out;
  for (const auto& [name, prop] : ontology.properties) {
    for (uint32_t i : index.lookup(1, iri_token(config.ontology(name)))) {
      const Quad& q = index.at(i);
      auto subject_types = declared_types(index, q.subject, rdf_type, config.ontology_ns);
      bool domain_ok = std::any_of(subject_types.begin(), subject_types.end(),
                                   [&](const std::string& c) { return ontology.is_subclass(c, prop.domain); });
      if (!domain_ok) {
        out.push_back({q, name, "domain",
                       name + " expects a " + prop.domain + " subject" +
                           (subject_types.empty() ? " (subject has no class)" : ", got " + text::join(subject_types, ", "))});
      }
      bool is_literal = !q.object.empty() && q.object.front() == '"';
      if (prop.range.literal) {
        if (!is_literal) out.push_back({q, name, "range", name + " expects a literal object"});
      } else if (is_literal) {
        out.push_back({q, name, "range", name + " expects a " + prop.range.class_name + " object, got a literal"});
      } else {
        auto object_types = declared_types(index, q.object, rdf_type, config.ontology_ns);
        bool range_ok = std::any_of(object_types.begin(), object_types.end(), [&](const std::string& c) {
          return ontology.is_subclass(c, prop.range.class_name);
        });
        if (!range_ok) {
          out.push_back({q, name, "range",
                         name + " expects a " + prop.range.class_name + " object" +
                             (object_types.empty() ? " (object has no class)" : ", got " + text::join(object_types, ", "))});
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<FormatConsistency> value_consistency(const std::vector<Record>& records,
                                                 const std::vector<DeclaredFormat>& formats) {
  std::vector<FormatConsistency> out;
  for (const auto& f : formats) {
    FormatConsistency c;
    c.format = f;
    for (const auto& r : records) {
      if (r.template_id != f.template_id) continue;
      auto it = r.tables.find(f.table);
      if (it == r.tables.end()) continue;
      for (size_t i = 0; i < it->second.size(); ++i) {
        const Row& row = it->second[i];
        if (row.deleted) continue;
        auto cell = row.cells.find(f.column);
        if (cell == row.cells.end() || cell->second.empty()) continue;
        ++c.total;
        if (normalize_literal(f.kind, f.format, cell->second.raw)) {
          ++c.parsed;
        } else {
          c.failures.push_back({r.id, f.table, i, {f.column}});
        }
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<DuplicateCandidate> conciseness_report(const CurationStore& curation, const std::vector<MatchRule>& rules) {
  auto locals = curation.locals();
  auto masters = curation.masters();
  auto exceptions = curation.exceptions();
  std::map<std::string, std::set<std::string>> peers;
  for (const auto& e : exceptions) {
    for (const auto& p : e.peers) {
      peers[e.local_id].insert(p);
      peers[p].insert(e.local_id);
    }
  }
  auto separated = [&](const std::string& a, const std::string& b) {
    for (const auto& m : masters.at(a).members) {
      auto it = peers.find(m);
      if (it == peers.end()) continue;
      for (const auto& n : masters.at(b).members) {
        if (it->second.count(n)) return true;
      }
    }
    return false;
  };
  std::set<DuplicateCandidate> out;
  for (const auto& rule : rules) {
    std::map<std::vector<std::string>, std::set<std::string>> classes;
    for (const auto& [id, local] : locals) {
      if (local.entity_type != rule.entity_type) continue;
      auto key = rule.key(local.attributes);
      if (!key) continue;
      bool excluded = std::any_of(exceptions.begin(), exceptions.end(), [&](const UnmatchException& e) {
        return e.local_id == id && rule.key(e.key_snapshot) == key;
      });
      if (!excluded) classes[*key].insert(local.master_id);
    }
    for (const auto& [key, ms] : classes) {
      for (auto a = ms.begin(); a != ms.end(); ++a) {
        for (auto b = std::next(a); b != ms.end(); ++b) {
          if (!separated(*a, *b)) out.insert({rule.entity_type, *a, *b, key});
        }
      }
    }
  }
  return {out.begin(), out.end()};
}

std::vector<PropertyWarning> property_warnings(const OntologySchema& ontology) {
  std::vector<PropertyWarning> out;
  for (auto a = ontology.properties.begin(); a != ontology.properties.end(); ++a) {
    for (auto b = std::next(a); b != ontology.properties.end(); ++b) {
      const auto& pa = a->second;
      const auto& pb = b->second;
      if (pa.domain != pb.domain || pa.range.to_string() != pb.range.to_string()) continue;
      if (normalized_property_name(pa.name) != normalized_property_name(pb.name)) continue;
      out.push_back({pa.name, pb.name,
                     pa.name + " and " + pb.name + " share domain " + pa.domain + " and range " +
                         pa.range.to_string() + " and may be the same attribute"});
    }
  }
  return out;
}

}  // namespace archgraph
