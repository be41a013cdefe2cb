#include "archgraph/mapping.hpp"

#include <set>

#include "archgraph/error.hpp"

namespace archgraph {

std::string link_target_name(LinkTarget target) {
  switch (target) {
    case LinkTarget::kLiteral: return "literal";
    case LinkTarget::kEntity: return "entity";
    case LinkTarget::kVocabTerm: return "vocab-term";
    case LinkTarget::kEntityRef: return "entity-ref";
  }
  return "literal";
}

bool ValidationReport::has_rule(std::string_view rule) const {
  for (const auto& i : issues) {
    if (i.rule == rule) return true;
  }
  return false;
}

Json ValidationReport::to_json() const {
  Json arr = Json::array();
  for (const auto& i : issues) {
    arr.push_back({{"location", i.location}, {"rule", i.rule}, {"message", i.message}});
  }
  return Json{{"issues", arr}};
}

namespace {

std::optional<LinkTarget> parse_target(std::string_view s) {
  if (s == "literal") return LinkTarget::kLiteral;
  if (s == "entity") return LinkTarget::kEntity;
  if (s == "vocab-term") return LinkTarget::kVocabTerm;
  if (s == "entity-ref") return LinkTarget::kEntityRef;
  return std::nullopt;
}

EntityMap entity_from_json(const Json& j, const std::string& ctx, const std::string& parent_table);

LinkSpec link_from_json(const Json& j, const std::string& ctx, const std::string& table) {
  LinkSpec l;
  l.property = require_string(j, "property", ctx);
  std::string target = require_string(j, "target", ctx);
  auto t = parse_target(target);
  if (!t) throw Error(ErrorCode::kParseError, ctx + ": unknown target '" + target + "'");
  l.target = *t;
  if (l.target == LinkTarget::kEntity) {
    l.nested = std::make_shared<EntityMap>(entity_from_json(require(j, "entity", ctx), ctx + ".entity", table));
  } else {
    l.column = require_string(j, "column", ctx);
  }
  if (j.contains("kind")) {
    std::string k = j.at("kind").get<std::string>();
    l.literal_kind = parse_literal_kind(k);
    if (!l.literal_kind) throw Error(ErrorCode::kParseError, ctx + ": unknown literal kind '" + k + "'");
  }
  if (j.contains("format")) l.source_format = j.at("format").get<std::string>();
  if (l.target == LinkTarget::kEntityRef) l.entity_type = require_string(j, "entity_type", ctx);
  return l;
}

EntityMap entity_from_json(const Json& j, const std::string& ctx, const std::string& parent_table) {
  EntityMap e;
  e.id = require_string(j, "id", ctx);
  std::string here = ctx + "(" + e.id + ")";
  e.table = parent_table.empty() ? require_string(j, "table", here) : j.value("table", parent_table);
  e.class_name = require_string(j, "class", here);
  if (j.contains("local")) e.local_group = j.at("local").get<std::string>();
  if (j.contains("uri")) e.uri = UriTemplate::parse(j.at("uri").get<std::string>());
  if (j.contains("links")) {
    size_t i = 0;
    for (const auto& jl : j.at("links")) {
      e.links.push_back(link_from_json(jl, here + ".links[" + std::to_string(i++) + "]", e.table));
    }
  }
  return e;
}

Json entity_to_json(const EntityMap& e, bool nested);

Json link_to_json(const LinkSpec& l) {
  Json j{{"property", l.property}, {"target", link_target_name(l.target)}};
  if (l.target == LinkTarget::kEntity) {
    j["entity"] = entity_to_json(*l.nested, true);
  } else {
    j["column"] = l.column;
  }
  if (l.literal_kind) j["kind"] = literal_kind_name(*l.literal_kind);
  if (l.source_format) j["format"] = *l.source_format;
  if (l.target == LinkTarget::kEntityRef) j["entity_type"] = l.entity_type;
  return j;
}

Json entity_to_json(const EntityMap& e, bool nested) {
  Json j{{"id", e.id}, {"class", e.class_name}};
  if (!nested) j["table"] = e.table;
  if (e.local_group) j["local"] = *e.local_group;
  if (e.uri) j["uri"] = e.uri->source();
  Json links = Json::array();
  for (const auto& l : e.links) links.push_back(link_to_json(l));
  j["links"] = links;
  return j;
}

class Validator {
 public:
  Validator(const MappingSpec& spec, const OntologySchema& onto, const Template& tmpl)
      : spec_(spec), onto_(onto), tmpl_(tmpl) {}

  ValidationReport run() {
    if (spec_.template_id != tmpl_.id || spec_.template_version != tmpl_.version) {
      add("template", "TemplateMismatch",
          "mapping binds " + spec_.template_id + " v" + std::to_string(spec_.template_version) +
              " but was checked against " + tmpl_.id + " v" + std::to_string(tmpl_.version));
    }
    for (const auto& [type, cls] : spec_.entity_classes) {
      if (!onto_.has_class(cls)) add("entity_classes." + type, "UnknownClass", "class " + cls + " not declared");
    }
    if (!onto_.has_class(spec_.term_class)) {
      add("term_class", "UnknownClass", "class " + spec_.term_class + " not declared");
    }
    std::set<std::string> ids;
    for (size_t i = 0; i < spec_.entities.size(); ++i) {
      const auto& e = spec_.entities[i];
      if (!ids.insert(e.id).second) add("entities[" + std::to_string(i) + "]", "DuplicateId", "duplicate entity map id " + e.id);
      entity(e, "entities[" + std::to_string(i) + "](" + e.id + ")", nullptr);
    }
    return std::move(report_);
  }

 private:
  void add(std::string location, std::string rule, std::string message) {
    report_.issues.push_back({std::move(location), std::move(rule), std::move(message)});
  }

  void entity(const EntityMap& e, const std::string& loc, const TableSpec* parent) {
    const TableSpec* table = tmpl_.find_table(e.table);
    if (!table) {
      add(loc, "UnknownTable", "table " + e.table + " not in template " + tmpl_.id);
    } else if (parent && parent != table) {
      add(loc, "NestedTableMismatch", "nested entity must map the parent's table " + parent->name);
    }
    if (!onto_.has_class(e.class_name)) add(loc, "UnknownClass", "class " + e.class_name + " not declared");
    if (e.local_group.has_value() == e.uri.has_value()) {
      add(loc, "InvalidSubject", "exactly one of 'local' and 'uri' must be given");
    }
    if (e.local_group && table) {
      std::optional<std::string> type;
      for (const auto& c : table->columns) {
        const auto* ref = std::get_if<EntityRefField>(&c.kind);
        if (ref && c.group() == *e.local_group) type = ref->entity_type;
      }
      if (!type) {
        add(loc, "UnknownGroup", "no entity-ref column group '" + *e.local_group + "' in " + table->name);
      } else if (auto it = spec_.entity_classes.find(*type); it == spec_.entity_classes.end()) {
        add(loc, "UnknownEntityType", "entity type " + *type + " has no class in entity_classes");
      } else if (onto_.has_class(e.class_name) && !onto_.is_subclass(e.class_name, it->second) &&
                 !onto_.is_subclass(it->second, e.class_name)) {
        add(loc, "ClassMismatch", "class " + e.class_name + " incompatible with " + *type + " class " + it->second);
      }
    }
    if (e.uri && table) {
      for (const auto& c : e.uri->columns()) {
        if (!table->find_column(c)) add(loc + ".uri", "UnknownColumn", "column " + e.table + "." + c + " not in template");
      }
    }
    for (size_t i = 0; i < e.links.size(); ++i) {
      link(e, e.links[i], loc + ".links[" + std::to_string(i) + "]", table);
    }
  }

  void range_class(const OntologyProperty& p, const std::string& cls, const std::string& loc) {
    if (p.range.literal) {
      add(loc, "RangeViolation", "property " + p.name + " expects a literal, mapping links an instance of " + cls);
    } else if (onto_.has_class(cls) && !onto_.is_subclass(cls, p.range.class_name)) {
      add(loc, "RangeViolation", "property " + p.name + " expects " + p.range.class_name + ", got " + cls);
    }
  }

  void link(const EntityMap& owner, const LinkSpec& l, const std::string& loc, const TableSpec* table) {
    const OntologyProperty* p = onto_.property(l.property);
    if (!p) {
      add(loc, "UnknownProperty", "property " + l.property + " not declared");
    } else if (onto_.has_class(owner.class_name) && !onto_.is_subclass(owner.class_name, p->domain)) {
      add(loc, "DomainViolation",
          "property " + l.property + " has domain " + p->domain + "; cannot be asserted on " + owner.class_name);
    }
    const ColumnSpec* column = nullptr;
    if (l.target != LinkTarget::kEntity && table) {
      column = table->find_column(l.column);
      if (!column) add(loc, "UnknownColumn", "column " + owner.table + "." + l.column + " not in template");
    }
    switch (l.target) {
      case LinkTarget::kLiteral: {
        if (p && !p->range.literal) {
          add(loc, "RangeViolation", "property " + p->name + " expects " + p->range.class_name + ", mapping links a literal");
        }
        if (p && p->range.literal && l.literal_kind && *l.literal_kind != p->range.kind) {
          add(loc, "RangeViolation", "literal kind " + literal_kind_name(*l.literal_kind) +
                                         " differs from range " + p->range.to_string());
        }
        LiteralKind kind = l.literal_kind.value_or(p && p->range.literal ? p->range.kind : LiteralKind::kText);
        if (l.source_format && !is_known_format(kind, *l.source_format)) {
          add(loc, "UnknownFormat", "format '" + *l.source_format + "' not known for " + literal_kind_name(kind));
        }
        break;
      }
      case LinkTarget::kEntity:
        if (!l.nested) break;
        if (p) range_class(*p, l.nested->class_name, loc);
        entity(*l.nested, loc + ".entity(" + l.nested->id + ")", table);
        break;
      case LinkTarget::kVocabTerm:
        if (column && !std::holds_alternative<VocabTermField>(column->kind)) {
          add(loc, "TargetKindMismatch", "column " + column->name + " is " + field_kind_name(column->kind) + ", not vocab-term");
        }
        if (p) range_class(*p, spec_.term_class, loc);
        break;
      case LinkTarget::kEntityRef: {
        const auto* ref = column ? std::get_if<EntityRefField>(&column->kind) : nullptr;
        if (column && (!ref || ref->entity_type != l.entity_type)) {
          add(loc, "TargetKindMismatch", "column " + column->name + " is " + field_kind_name(column->kind) +
                                             (ref ? "(" + ref->entity_type + ")" : "") + ", not entity-ref(" +
                                             l.entity_type + ")");
        }
        auto it = spec_.entity_classes.find(l.entity_type);
        if (it == spec_.entity_classes.end()) {
          add(loc, "UnknownEntityType", "entity type " + l.entity_type + " has no class in entity_classes");
        } else if (p) {
          range_class(*p, it->second, loc);
        }
        break;
      }
    }
  }

  const MappingSpec& spec_;
  const OntologySchema& onto_;
  const Template& tmpl_;
  ValidationReport report_;
};

void collect_formats(const MappingSpec& spec, const EntityMap& e, const OntologySchema& onto,
                     std::vector<DeclaredFormat>& out) {
  for (const auto& l : e.links) {
    if (l.target == LinkTarget::kEntity && l.nested) collect_formats(spec, *l.nested, onto, out);
    if (l.target != LinkTarget::kLiteral || !l.source_format) continue;
    const auto* p = onto.property(l.property);
    LiteralKind kind = l.literal_kind.value_or(p && p->range.literal ? p->range.kind : LiteralKind::kText);
    out.push_back({spec.template_id, e.table, l.column, kind, *l.source_format});
  }
}

}  // namespace

MappingSpec parse_mapping_document(std::string_view document) {
  Json doc = parse_document(document, "mapping");
  try {
    if (doc.contains("format_version") && doc.at("format_version") != 1) {
      throw Error(ErrorCode::kParseError, "mapping: unsupported format_version");
    }
    MappingSpec spec;
    const Json& t = require(doc, "template", "mapping");
    spec.template_id = require_string(t, "id", "mapping template");
    spec.template_version = require(t, "version", "mapping template").get<int>();
    if (doc.contains("entity_classes")) {
      spec.entity_classes = doc.at("entity_classes").get<std::map<std::string, std::string>>();
    }
    spec.term_class = doc.value("term_class", spec.term_class);
    size_t i = 0;
    for (const auto& je : require(doc, "entities", "mapping")) {
      spec.entities.push_back(entity_from_json(je, "entities[" + std::to_string(i++) + "]", ""));
    }
    return spec;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("mapping: ") + e.what());
  }
}

Json mapping_to_json(const MappingSpec& spec) {
  Json entities = Json::array();
  for (const auto& e : spec.entities) entities.push_back(entity_to_json(e, false));
  return Json{{"format_version", 1},
              {"template", {{"id", spec.template_id}, {"version", spec.template_version}}},
              {"entity_classes", spec.entity_classes},
              {"term_class", spec.term_class},
              {"entities", entities}};
}

std::string serialize_mapping(const MappingSpec& spec) { return to_canonical(mapping_to_json(spec)); }

ValidationReport validate_mapping(const MappingSpec& spec, const OntologySchema& ontology,
                                  const Template& tmpl) {
  return Validator(spec, ontology, tmpl).run();
}

std::variant<MappingSpec, ValidationReport> parse_mapping(std::string_view document,
                                                          const OntologySchema& ontology,
                                                          const Template& tmpl) {
  MappingSpec spec = parse_mapping_document(document);
  ValidationReport report = validate_mapping(spec, ontology, tmpl);
  if (!report.ok()) return report;
  return spec;
}

std::vector<DeclaredFormat> declared_formats(const MappingSpec& spec, const OntologySchema& ontology) {
  std::vector<DeclaredFormat> out;
  for (const auto& e : spec.entities) collect_formats(spec, e, ontology, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace archgraph
