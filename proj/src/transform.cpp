#include "archgraph/transform.hpp"

#include <algorithm>
#include <functional>

#include "archgraph/error.hpp"
#include "archgraph/hashing.hpp"
#include "archgraph/text.hpp"

namespace archgraph {

namespace {

std::string hash_of(std::initializer_list<std::string> parts) {
  std::vector<std::string> v(parts);
  return content_hash(v);
}

void sort_unique(std::vector<Quad>& quads) {
  std::sort(quads.begin(), quads.end());
  quads.erase(std::unique(quads.begin(), quads.end()), quads.end());
}

// Assigns slug tails to (id, name) pairs sorted by id; the first id with a
// given slug keeps it, the rest fall back to their hash.
template <typename Id>
std::map<Id, std::string> assign_tails(const std::vector<std::tuple<Id, std::string, std::string>>& items) {
  std::map<Id, std::string> out;
  std::set<std::string> taken;
  for (const auto& [id, name, fallback] : items) {
    std::string s = text::slug(name);
    if (!s.empty() && taken.insert(s).second) {
      out[id] = s;
    } else {
      out[id] = fallback;
    }
  }
  return out;
}

std::vector<const ColumnSpec*> group_columns(const TableSpec& ts, const std::string& group) {
  std::vector<const ColumnSpec*> out;
  for (const auto& c : ts.columns) {
    if (std::holds_alternative<EntityRefField>(c.kind) && c.group() == group) out.push_back(&c);
  }
  return out;
}

class RecordEmitter {
 public:
  RecordEmitter(const Record& record, int version, const Template& tmpl, const MappingSpec& mapping,
                const TransformEnv& env)
      : record_(record), version_(version), tmpl_(tmpl), mapping_(mapping), env_(env), cfg_(*env.config) {
    graph_ = cfg_.record_graph(record.id);
    record_iri_ = cfg_.record_iri(record.id);
    out_.record_id = record.id;
  }

  RecordQuads run() {
    emit_record_node();
    for (const auto& m : mapping_.entities) {
      const TableSpec* ts = table(m.table);
      auto it = record_.tables.find(m.table);
      if (!ts || it == record_.tables.end()) continue;
      for (size_t r = 0; r < it->second.size(); ++r) {
        if (it->second[r].deleted) continue;
        emit_entity(m, *ts, r, it->second[r]);
      }
    }
    emit_term_appearances();
    sort_unique(out_.graph);
    sort_unique(out_.provenance);
    return std::move(out_);
  }

 private:
  struct Pending {
    std::string predicate;
    Term object;
  };

  const TableSpec* table(const std::string& name) const {
    for (const auto& t : tmpl_.tables) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }

  static std::string value(const TableSpec& ts, const Row& row, const std::string& column) {
    const ColumnSpec* c = ts.find_column(column);
    if (!c) return {};
    const Cell* cell = row.cell(*c);
    return cell ? cell->raw : std::string();
  }

  void add(const std::string& s, const std::string& p, const Term& o) {
    out_.graph.push_back(make_quad(s, p, o, graph_));
  }
  void prov(const std::string& s, const std::string& p, const Term& o) {
    out_.provenance.push_back(make_quad(s, p, o, cfg_.provenance_graph));
  }

  void emit_record_node() {
    prov(record_iri_, vocab::kRdfType, Term::iri(cfg_.artifact(term::kRecordClass)));
    prov(record_iri_, cfg_.artifact(term::kRecordId), Term::literal(record_.id));
    prov(record_iri_, cfg_.artifact(term::kRecordVersion),
         Term::literal(std::to_string(version_), vocab::kXsdInteger));
    prov(record_iri_, cfg_.artifact(term::kTemplate), Term::literal(record_.template_id));
    prov(record_iri_, cfg_.artifact(term::kTemplateVersion),
         Term::literal(std::to_string(record_.template_version), vocab::kXsdInteger));
  }

  void emit_anchor(const std::string& subject, const std::string& table, size_t row,
                   const std::string& discriminator, const std::vector<std::string>& columns) {
    std::string node = env_.iris->anchor_node(record_.id, table, row, discriminator);
    prov(subject, cfg_.artifact(term::kHasProvenance), Term::iri(node));
    prov(node, cfg_.artifact(term::kFromRecord), Term::iri(record_iri_));
    prov(node, cfg_.artifact(term::kInTable), Term::literal(table));
    prov(node, cfg_.artifact(term::kAtRow), Term::literal(std::to_string(row), vocab::kXsdInteger));
    for (const auto& c : columns) prov(node, cfg_.artifact(term::kFromColumn), Term::literal(c));
  }

  std::optional<std::string> local_subject(const TableSpec& ts, size_t r, const Row& row,
                                           const std::string& group, std::vector<std::string>* columns) {
    auto cols = group_columns(ts, group);
    if (cols.empty()) return std::nullopt;
    bool any = false;
    Anchor anchor{record_.id, ts.name, r, {}};
    for (const auto* c : cols) {
      anchor.columns.push_back(c->name);
      const Cell* cell = row.cell(*c);
      if (cell && !cell->empty()) any = true;
    }
    if (!any) return std::nullopt;
    if (columns) *columns = anchor.columns;
    const std::string& type = std::get<EntityRefField>(cols.front()->kind).entity_type;
    return env_.iris->local(type, local_id_for(anchor, type, group));
  }

  // Emits the entity for one row and returns its subject, or nothing when
  // the row holds no data for it.
  std::optional<std::string> emit_entity(const EntityMap& m, const TableSpec& ts, size_t r, const Row& row) {
    std::optional<std::string> subject;
    std::vector<std::string> anchor_columns;
    if (m.local_group) {
      subject = local_subject(ts, r, row, *m.local_group, &anchor_columns);
      if (!subject) return std::nullopt;
    }

    std::vector<Pending> pending;
    std::vector<std::string> used;
    for (const auto& link : m.links) {
      std::string prop = cfg_.ontology(link.property);
      switch (link.target) {
        case LinkTarget::kLiteral: {
          std::string raw = value(ts, row, link.column);
          if (raw.empty()) break;
          used.push_back(link.column);
          pending.push_back({prop, Term::literal(raw)});
          if (!link.source_format) break;
          LiteralKind kind = link.literal_kind.value_or(LiteralKind::kText);
          if (!link.literal_kind) {
            if (const auto* p = env_.ontology->property(link.property); p && p->range.literal) kind = p->range.kind;
          }
          if (auto norm = normalize_literal(kind, *link.source_format, raw)) {
            pending.push_back({cfg_.artifact(std::string(term::kNormalized) + link.property),
                               Term::literal(*norm, literal_datatype(kind))});
          }
          break;
        }
        case LinkTarget::kVocabTerm: {
          std::string raw = value(ts, row, link.column);
          if (raw.empty()) break;
          const ColumnSpec* c = ts.find_column(link.column);
          if (!c || !std::holds_alternative<VocabTermField>(c->kind)) break;
          used.push_back(link.column);
          pending.push_back({prop, Term::iri(env_.iris->term(std::get<VocabTermField>(c->kind).vocabulary, raw))});
          break;
        }
        case LinkTarget::kEntityRef: {
          const ColumnSpec* c = ts.find_column(link.column);
          if (!c) break;
          if (auto target = local_subject(ts, r, row, c->group(), nullptr)) {
            pending.push_back({prop, Term::iri(*target)});
          }
          break;
        }
        case LinkTarget::kEntity: {
          if (!link.nested) break;
          if (auto target = emit_entity(*link.nested, ts, r, row)) pending.push_back({prop, Term::iri(*target)});
          break;
        }
      }
    }

    if (!subject) {
      if (pending.empty()) return std::nullopt;
      subject = uri_subject(m, ts, r, row);
      anchor_columns = used;
    }
    add(*subject, vocab::kRdfType, Term::iri(cfg_.ontology(m.class_name)));
    for (const auto& p : pending) add(*subject, p.predicate, p.object);
    emit_anchor(*subject, ts.name, r, *subject, anchor_columns);
    return subject;
  }

  std::string uri_subject(const EntityMap& m, const TableSpec& ts, size_t r, const Row& row) {
    RowContext ctx{record_.id, ts.name, r, [&](const std::string& col) { return value(ts, row, col); }};
    UriEvalOptions opts;
    opts.hash_fallback = true;
    opts.warnings = &out_.warnings;
    std::string tail = m.uri ? evaluate_tail(*m.uri, ctx, opts) : std::string();
    if (tail.empty()) {
      tail = hash_of({record_.id, ts.name, std::to_string(r), m.id});
      out_.warnings.push_back("empty IRI for " + m.id + " in " + record_.id + "/" + ts.name + "/" +
                              std::to_string(r) + "; using hash " + tail);
    }
    return cfg_.uri_prefix + "/" + text::slug(m.class_name) + "/" + tail;
  }

  void emit_term_appearances() {
    for (const auto& ts : tmpl_.tables) {
      auto it = record_.tables.find(ts.name);
      if (it == record_.tables.end()) continue;
      for (size_t r = 0; r < it->second.size(); ++r) {
        const Row& row = it->second[r];
        if (row.deleted) continue;
        for (const auto& c : ts.columns) {
          if (!std::holds_alternative<VocabTermField>(c.kind)) continue;
          const Cell* cell = row.cell(c);
          if (!cell || cell->empty()) continue;
          std::string t = env_.iris->term(std::get<VocabTermField>(c.kind).vocabulary, cell->raw);
          emit_anchor(t, ts.name, r, t + '\x1f' + c.name, {c.name});
        }
      }
    }
  }

  const Record& record_;
  int version_;
  const Template& tmpl_;
  const MappingSpec& mapping_;
  const TransformEnv& env_;
  const Config& cfg_;
  std::string graph_;
  std::string record_iri_;
  RecordQuads out_;
};

}  // namespace

CurationView CurationView::of(const CurationStore& store) {
  return {store.locals(), store.masters(), store.terms()};
}

bool master_is_emitted(const MasterInstance& master) {
  return master.members.size() > 1 || !master.preferred_attributes.empty() || !master.enrichments.empty();
}

std::string master_display_name(const MasterInstance& master, const CurationView& view) {
  std::vector<std::string> parts;
  std::set<std::string> seen_roles;
  if (!master.members.empty()) {
    auto it = view.locals.find(*master.members.begin());
    if (it != view.locals.end()) {
      for (const auto& [role, raw] : it->second.attributes) {
        seen_roles.insert(role);
        auto pref = master.preferred_attributes.find(role);
        std::string v = pref != master.preferred_attributes.end() ? pref->second : raw;
        if (!v.empty()) parts.push_back(v);
      }
    }
  }
  for (const auto& [role, v] : master.preferred_attributes) {
    if (!seen_roles.count(role) && !v.empty()) parts.push_back(v);
  }
  return text::join(parts, " ");
}

IriScheme::IriScheme(const Config& config, const CurationView& view) : config_(&config) {
  std::map<std::string, std::vector<std::tuple<std::string, std::string, std::string>>> by_type;
  for (const auto& [id, m] : view.masters) {
    if (!master_is_emitted(m)) continue;
    by_type[m.entity_type].emplace_back(id, master_display_name(m, view), hash_of({"master", id}));
  }
  for (const auto& [type, items] : by_type) {
    for (const auto& [id, tail] : assign_tails(items)) {
      masters_[id] = config.uri_prefix + "/" + text::slug(type) + "/" + tail;
    }
  }
  std::map<std::string, std::vector<std::tuple<std::string, std::string, std::string>>> by_vocab;
  for (const auto& [key, t] : view.terms) {
    by_vocab[key.first].emplace_back(key.second, key.second, hash_of({key.first, key.second}));
  }
  for (const auto& [vocab_name, items] : by_vocab) {
    for (const auto& [raw, tail] : assign_tails(items)) {
      terms_[{vocab_name, raw}] = config.uri_prefix + "/term/" + text::slug(vocab_name) + "/" + tail;
    }
  }
}

std::string IriScheme::local(const std::string& entity_type, const std::string& local_id) const {
  return config_->uri_prefix + "/" + text::slug(entity_type) + "/local/" + local_id;
}

std::string IriScheme::master(const std::string& master_id) const {
  auto it = masters_.find(master_id);
  if (it != masters_.end()) return it->second;
  return config_->uri_prefix + "/master/" + hash_of({"master", master_id});
}

std::string IriScheme::term(const std::string& vocabulary, const std::string& raw) const {
  auto it = terms_.find({vocabulary, raw});
  if (it != terms_.end()) return it->second;
  std::string s = text::slug(raw);
  return config_->uri_prefix + "/term/" + text::slug(vocabulary) + "/" +
         (s.empty() ? hash_of({vocabulary, raw}) : s);
}

std::string IriScheme::anchor_node(const std::string& record_id, const std::string& table, std::size_t row,
                                   const std::string& discriminator) const {
  std::string name = record_id + '\x1f' + table + '\x1f' + std::to_string(row) + '\x1f' + discriminator;
  return config_->uri_prefix + "/provenance/" + uuid_v5(name);
}

RecordQuads transform_record(const Record& record, int record_version, const Template& tmpl,
                             const MappingSpec& mapping, const TransformEnv& env) {
  if (record.template_id != mapping.template_id || tmpl.id != mapping.template_id) {
    throw Error(ErrorCode::kVersionMismatch, "record " + record.id + " uses template " + record.template_id +
                                                 " but the mapping is for " + mapping.template_id);
  }
  if (record.template_version != mapping.template_version || tmpl.version != mapping.template_version) {
    throw Error(ErrorCode::kVersionMismatch,
                "record " + record.id + " is at template version " + std::to_string(record.template_version) +
                    " but the mapping targets version " + std::to_string(mapping.template_version));
  }
  return RecordEmitter(record, record_version, tmpl, mapping, env).run();
}

std::vector<RecordQuads> transform_records_serial(const std::vector<RecordInput>& inputs, const TransformEnv& env) {
  std::vector<RecordQuads> out;
  out.reserve(inputs.size());
  for (const auto& in : inputs) out.push_back(transform_record(in.record, in.version, *in.tmpl, *in.mapping, env));
  return out;
}

CurationQuads transform_curation(const CurationView& view, const IriScheme& iris,
                                 const std::map<std::string, std::string>& entity_classes,
                                 const std::string& term_class) {
  const Config& cfg = iris.config();
  CurationQuads out;
  auto link = [&](const std::string& s, const std::string& p, const Term& o) {
    out.links.push_back(make_quad(s, p, o, cfg.curation_links_graph));
  };
  for (const auto& [id, m] : view.masters) {
    if (!master_is_emitted(m)) continue;
    std::string node = iris.master(id);
    if (auto it = entity_classes.find(m.entity_type); it != entity_classes.end()) {
      link(node, vocab::kRdfType, Term::iri(cfg.ontology(it->second)));
    }
    link(node, cfg.artifact(term::kEntityType), Term::literal(m.entity_type));
    std::string label = master_display_name(m, view);
    if (!label.empty()) link(node, vocab::kRdfsLabel, Term::literal(label));
    for (const auto& local_id : m.members) link(node, cfg.artifact(term::kSameIdentity), Term::iri(iris.local(m.entity_type, local_id)));
    for (const auto& [role, v] : m.preferred_attributes) {
      link(node, cfg.artifact(std::string(term::kPreferred) + role), Term::literal(v));
    }
    for (const auto& [key, v] : m.enrichments) {
      link(node, cfg.artifact(std::string(term::kEnrichment) + key), Term::literal(v));
    }
  }
  auto hier = [&](const std::string& s, const std::string& p, const Term& o) {
    out.hierarchy.push_back(make_quad(s, p, o, cfg.term_hierarchy_graph));
  };
  for (const auto& [key, t] : view.terms) {
    std::string node = iris.term(key.first, key.second);
    hier(node, vocab::kRdfType, Term::iri(cfg.ontology(term_class)));
    hier(node, vocab::kRdfsLabel, Term::literal(t.raw));
    hier(node, cfg.artifact(term::kInVocabulary), Term::literal(t.vocabulary));
    if (t.preferred_term) hier(node, vocab::kSkosPrefLabel, Term::literal(*t.preferred_term));
    if (t.broader) hier(node, vocab::kSkosBroader, Term::iri(iris.term(t.vocabulary, *t.broader)));
  }
  sort_unique(out.links);
  sort_unique(out.hierarchy);
  return out;
}

std::set<std::pair<std::string, std::string>> transitive_closure(
    const std::vector<std::pair<std::string, std::string>>& edges) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& [a, b] : edges) adj[a].push_back(b);
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [start, _] : adj) {
    std::set<std::string> seen;
    std::vector<std::string> stack = adj[start];
    while (!stack.empty()) {
      std::string n = std::move(stack.back());
      stack.pop_back();
      if (!seen.insert(n).second) continue;
      out.emplace(start, n);
      if (auto it = adj.find(n); it != adj.end()) {
        for (const auto& m : it->second) {
          if (!seen.count(m)) stack.push_back(m);
        }
      }
    }
  }
  return out;
}

std::vector<Quad> materialise_hierarchy(const CurationView& view, const IriScheme& iris) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (const auto& [key, t] : view.terms) {
    if (t.broader) edges.emplace_back(iris.term(key.first, key.second), iris.term(key.first, *t.broader));
  }
  std::vector<Quad> out;
  for (const auto& [a, c] : transitive_closure(edges)) {
    out.push_back(make_quad(a, vocab::kSkosBroaderTransitive, Term::iri(c), iris.config().materialised_graph));
  }
  sort_unique(out);
  return out;
}

Json TransformReport::to_json() const {
  Json graphs_json = Json::object();
  size_t total = 0;
  for (const auto& [g, n] : graph_quads) {
    graphs_json[g] = n;
    total += n;
  }
  return {{"commit", commit}, {"records", records}, {"graphs", graphs_json}, {"quads", total}, {"warnings", warnings}};
}

TransformReport transform_all(const TransformScope& scope, const RecordStore& records,
                              const CurationStore& curation, const std::map<std::string, MappingSpec>& mappings,
                              const OntologySchema& ontology, const Config& config, GraphStore& graphs,
                              bool parallel) {
  std::map<std::string, int> published;
  for (const auto& [id, v] : records.published()) published[id] = v;

  std::vector<std::pair<std::string, int>> targets;
  if (scope.all) {
    targets.assign(published.begin(), published.end());
  } else {
    for (const auto& id : scope.records) {
      auto it = published.find(id);
      if (it == published.end()) {
        records.versions(id);  // throws kUnknownRecord for unknown ids
        throw Error(ErrorCode::kUnknownRecord, "record " + id + " has no published version");
      }
      targets.emplace_back(id, it->second);
    }
  }

  std::vector<RecordInput> inputs;
  std::map<std::pair<std::string, int>, Template> templates;
  for (const auto& [id, v] : targets) {
    Record r = records.get_record(id, v);
    auto m = mappings.find(r.template_id);
    if (m == mappings.end()) {
      throw Error(ErrorCode::kMissingMapping, "no mapping for template '" + r.template_id + "' (record " + id + ")");
    }
    if (r.template_version > m->second.template_version) {
      throw Error(ErrorCode::kVersionMismatch, "record " + id + " uses template " + r.template_id + " version " +
                                                   std::to_string(r.template_version) + " but its mapping targets version " +
                                                   std::to_string(m->second.template_version));
    }
    auto key = std::make_pair(r.template_id, m->second.template_version);
    if (!templates.count(key)) templates.emplace(key, records.get_template(key.first, key.second));
    const Template& t = templates.at(key);
    if (r.template_version < t.version) r = upgrade_record(r, t);
    inputs.push_back({std::move(r), v, &t, &m->second});
  }

  CurationView view = CurationView::of(curation);
  IriScheme iris(config, view);
  TransformEnv env{&config, &ontology, &iris};
  auto results = parallel ? transform_records_parallel(inputs, env) : transform_records_serial(inputs, env);

  TransformReport report;
  std::vector<std::pair<std::string, std::vector<Quad>>> batch;
  std::set<std::string> in_scope;
  std::vector<Quad> provenance;
  for (auto& res : results) {
    in_scope.insert(res.record_id);
    report.records.push_back(res.record_id);
    for (auto& w : res.warnings) report.warnings.push_back(std::move(w));
    provenance.insert(provenance.end(), res.provenance.begin(), res.provenance.end());
    batch.emplace_back(config.record_graph(res.record_id), std::move(res.graph));
  }

  auto snap = graphs.snapshot();
  if (scope.all) {
    for (const auto& [g, _] : snap->graphs()) {
      std::string rid = config.record_of_graph(g);
      if (!rid.empty() && !in_scope.count(rid)) batch.emplace_back(g, std::vector<Quad>{});
    }
  } else if (auto it = snap->graphs().find(config.provenance_graph); it != snap->graphs().end()) {
    // Keep provenance of out-of-scope records: drop the record nodes and
    // anchor nodes of in-scope records, and the links pointing at them.
    std::set<std::string> stale;
    std::string from_record = iri_token(config.artifact(term::kFromRecord));
    for (const auto& id : in_scope) stale.insert(iri_token(config.record_iri(id)));
    for (const auto& q : *it->second) {
      if (q.predicate == from_record && stale.count(q.object)) stale.insert(q.subject);
    }
    for (const auto& q : *it->second) {
      if (!stale.count(q.subject) && !stale.count(q.object)) provenance.push_back(q);
    }
  }

  std::map<std::string, std::string> entity_classes;
  std::string term_class = "Concept";
  for (const auto& [_, m] : mappings) {
    for (const auto& [type, cls] : m.entity_classes) entity_classes.emplace(type, cls);
  }
  if (!mappings.empty()) term_class = mappings.begin()->second.term_class;
  auto cur = transform_curation(view, iris, entity_classes, term_class);
  batch.emplace_back(config.curation_links_graph, std::move(cur.links));
  batch.emplace_back(config.term_hierarchy_graph, std::move(cur.hierarchy));
  batch.emplace_back(config.materialised_graph, materialise_hierarchy(view, iris));
  batch.emplace_back(config.provenance_graph, std::move(provenance));

  for (auto& [g, quads] : batch) {
    sort_unique(quads);
    report.graph_quads[g] = quads.size();
  }
  report.commit = graphs.replace_graphs(std::move(batch));
  return report;
}

}  // namespace archgraph
