#include "archgraph/record_model.hpp"

#include <algorithm>

#include "archgraph/error.hpp"
#include "archgraph/text.hpp"

namespace archgraph {

namespace {

constexpr int kFormatVersion = 1;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_format_version(const Json& doc, std::string_view what) {
  auto it = doc.find("format_version");
  if (it != doc.end() && (!it->is_number_integer() || it->get<int>() != kFormatVersion)) {
    throw Error(ErrorCode::kParseError,
                std::string(what) + ": unsupported format_version");
  }
}

Json column_to_json(const ColumnSpec& c) {
  Json j;
  j["name"] = c.name;
  j["kind"] = field_kind_name(c.kind);
  std::visit(Overloaded{
                 [&](const EntityRefField& e) { j["entity_type"] = e.entity_type; },
                 [&](const VocabTermField& v) { j["vocabulary"] = v.vocabulary; },
                 [](const auto&) {},
             },
             c.kind);
  if (c.required) j["required"] = true;
  if (c.entity_group) j["group"] = *c.entity_group;
  if (c.role) j["role"] = *c.role;
  if (!c.aliases.empty()) j["aliases"] = c.aliases;
  return j;
}

ColumnSpec column_from_json(const Json& j, const std::string& ctx) {
  ColumnSpec c;
  c.name = require_string(j, "name", ctx);
  std::string kind = require_string(j, "kind", ctx + "." + c.name);
  if (kind == "plain-text") {
    c.kind = PlainTextField{};
  } else if (kind == "date") {
    c.kind = DateField{};
  } else if (kind == "number") {
    c.kind = NumberField{};
  } else if (kind == "entity-ref") {
    c.kind = EntityRefField{require_string(j, "entity_type", ctx + "." + c.name)};
  } else if (kind == "vocab-term") {
    c.kind = VocabTermField{require_string(j, "vocabulary", ctx + "." + c.name)};
  } else {
    throw Error(ErrorCode::kParseError, ctx + "." + c.name + ": unknown column kind '" + kind + "'");
  }
  c.required = j.value("required", false);
  if (j.contains("group")) c.entity_group = j.at("group").get<std::string>();
  if (j.contains("role")) c.role = j.at("role").get<std::string>();
  if (j.contains("aliases")) c.aliases = j.at("aliases").get<std::vector<std::string>>();
  return c;
}

Json table_to_json(const TableSpec& t) {
  Json cols = Json::array();
  for (const auto& c : t.columns) cols.push_back(column_to_json(c));
  return Json{{"name", t.name}, {"multi_row", t.multi_row}, {"columns", cols}};
}

TableSpec table_from_json(const Json& j, const std::string& ctx) {
  TableSpec t;
  t.name = require_string(j, "name", ctx);
  t.multi_row = j.value("multi_row", true);
  for (const auto& c : require(j, "columns", ctx + "." + t.name)) {
    t.columns.push_back(column_from_json(c, ctx + "." + t.name));
  }
  return t;
}

}  // namespace

std::string field_kind_name(const FieldKind& kind) {
  return std::visit(Overloaded{
                        [](const PlainTextField&) { return std::string("plain-text"); },
                        [](const DateField&) { return std::string("date"); },
                        [](const NumberField&) { return std::string("number"); },
                        [](const EntityRefField&) { return std::string("entity-ref"); },
                        [](const VocabTermField&) { return std::string("vocab-term"); },
                    },
                    kind);
}

bool ColumnSpec::answers_to(const std::string& n) const {
  return n == name || std::find(aliases.begin(), aliases.end(), n) != aliases.end();
}

const ColumnSpec* TableSpec::find_column(const std::string& name_or_alias) const {
  for (const auto& c : columns) {
    if (c.name == name_or_alias) return &c;
  }
  for (const auto& c : columns) {
    if (c.answers_to(name_or_alias)) return &c;
  }
  return nullptr;
}

const TableSpec* Template::find_table(const std::string& n) const {
  for (const auto& t : tables) {
    if (t.name == n) return &t;
  }
  return nullptr;
}

void check_template(const Template& t, const std::set<std::string>& entity_types) {
  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::kInvalidChange, "template " + t.id + ": " + msg);
  };
  if (!text::is_identifier(t.id)) fail("id must be an identifier");
  std::set<std::string> vocabularies(t.vocabularies.begin(), t.vocabularies.end());
  std::set<std::string> table_names;
  for (const auto& table : t.tables) {
    if (!table_names.insert(table.name).second) fail("duplicate table " + table.name);
    std::set<std::string> names;
    for (const auto& c : table.columns) {
      if (!names.insert(c.name).second) fail("duplicate column " + table.name + "." + c.name);
      for (const auto& a : c.aliases) {
        if (!names.insert(a).second) fail("alias clashes in " + table.name + "." + a);
      }
      if (const auto* e = std::get_if<EntityRefField>(&c.kind)) {
        if (!entity_types.contains(e->entity_type)) {
          fail("unknown entity type '" + e->entity_type + "' in " + table.name + "." + c.name);
        }
      }
      if (const auto* v = std::get_if<VocabTermField>(&c.kind)) {
        if (!vocabularies.contains(v->vocabulary)) {
          fail("undeclared vocabulary '" + v->vocabulary + "' in " + table.name + "." + c.name);
        }
      }
    }
  }
}

Template evolve_template(const Template& t, const TemplateChange& change,
                         const std::set<std::string>& entity_types) {
  if (change.ops.empty()) throw Error(ErrorCode::kEmptyChange, "template change is empty");
  Template next = t;
  auto table_of = [&](const std::string& name) -> TableSpec& {
    for (auto& table : next.tables) {
      if (table.name == name) return table;
    }
    throw Error(ErrorCode::kInvalidChange, "unknown table " + name);
  };
  for (const auto& op : change.ops) {
    std::visit(Overloaded{
                   [&](const AddTable& a) { next.tables.push_back(a.table); },
                   [&](const AddColumn& a) { table_of(a.table).columns.push_back(a.column); },
                   [&](const RenameColumn& r) {
                     auto& table = table_of(r.table);
                     auto it = std::find_if(table.columns.begin(), table.columns.end(),
                                            [&](const ColumnSpec& c) { return c.name == r.from; });
                     if (it == table.columns.end()) {
                       throw Error(ErrorCode::kInvalidChange,
                                   "unknown column " + r.table + "." + r.from);
                     }
                     it->aliases.push_back(it->name);
                     it->name = r.to;
                   },
                   [&](const AddVocabulary& v) { next.vocabularies.push_back(v.name); },
                   [&](const DeleteTable& d) {
                     throw Error(ErrorCode::kDestructiveChange, "cannot delete table " + d.table);
                   },
                   [&](const DeleteColumn& d) {
                     throw Error(ErrorCode::kDestructiveChange,
                                 "cannot delete column " + d.table + "." + d.column);
                   },
               },
               op);
  }
  check_template(next, entity_types);
  next.version = t.version + 1;
  return next;
}

// ---------------------------------------------------------------------------

const Cell* Row::cell(const ColumnSpec& column) const {
  if (auto it = cells.find(column.name); it != cells.end()) return &it->second;
  for (const auto& a : column.aliases) {
    if (auto it = cells.find(a); it != cells.end()) return &it->second;
  }
  return nullptr;
}

std::string Anchor::to_string() const {
  return record_id + "/" + table + "/" + std::to_string(row) + "/" + text::join(columns, "+");
}

std::vector<Violation> validate_record(const Record& record, const Template& tmpl) {
  if (record.template_id != tmpl.id || record.template_version != tmpl.version) {
    throw Error(ErrorCode::kTemplateNotFound,
                "record " + record.id + " references " + record.template_id + " v" +
                    std::to_string(record.template_version) + ", got " + tmpl.id + " v" +
                    std::to_string(tmpl.version));
  }
  std::vector<Violation> out;
  for (const auto& [table_name, rows] : record.tables) {
    const TableSpec* table = tmpl.find_table(table_name);
    if (!table) {
      out.push_back({"UnknownTable", table_name, "table not defined by template " + tmpl.id});
      continue;
    }
    if (!table->multi_row) {
      auto live = std::count_if(rows.begin(), rows.end(), [](const Row& r) { return !r.deleted; });
      if (live > 1) {
        out.push_back({"RowCardinality", table_name,
                       "single-row table holds " + std::to_string(live) + " rows"});
      }
    }
    std::set<std::string> reported;
    for (size_t i = 0; i < rows.size(); ++i) {
      std::set<const ColumnSpec*> seen;
      for (const auto& [col, cell] : rows[i].cells) {
        const ColumnSpec* spec = table->find_column(col);
        if (!spec) {
          if (reported.insert(col).second) {
            out.push_back({"UnknownColumn", table_name + "." + col,
                           "column not defined in table " + table_name});
          }
        } else if (!seen.insert(spec).second) {
          out.push_back({"DuplicateColumn", table_name + "." + spec->name,
                         "row " + std::to_string(i) + " holds a column under two names"});
        }
      }
    }
  }
  return out;
}

Record upgrade_record(const Record& record, const Template& tmpl) {
  Record out = record;
  out.template_version = tmpl.version;
  for (auto& [table_name, rows] : out.tables) {
    const TableSpec* table = tmpl.find_table(table_name);
    if (!table) continue;
    for (auto& row : rows) {
      std::map<std::string, Cell> renamed;
      for (auto& [col, cell] : row.cells) {
        const ColumnSpec* spec = table->find_column(col);
        renamed[spec ? spec->name : col] = std::move(cell);
      }
      row.cells = std::move(renamed);
    }
  }
  return out;
}

std::vector<Mention> extract_mentions(const Record& record, const Template& tmpl) {
  std::vector<Mention> out;
  for (const auto& table : tmpl.tables) {
    auto it = record.tables.find(table.name);
    if (it == record.tables.end()) continue;
    const auto& rows = it->second;
    for (size_t r = 0; r < rows.size(); ++r) {
      const Row& row = rows[r];
      if (row.deleted) continue;
      std::set<std::pair<std::string, std::string>> done_groups;
      for (const auto& column : table.columns) {
        if (const auto* ref = std::get_if<EntityRefField>(&column.kind)) {
          auto key = std::make_pair(ref->entity_type, column.group());
          if (!done_groups.insert(key).second) continue;
          Mention m;
          m.kind = MentionKind::kEntity;
          m.entity_type = ref->entity_type;
          m.group = column.group();
          m.anchor = Anchor{record.id, table.name, r, {}};
          bool any = false;
          for (const auto& member : table.columns) {
            const auto* mref = std::get_if<EntityRefField>(&member.kind);
            if (!mref || mref->entity_type != ref->entity_type || member.group() != m.group) {
              continue;
            }
            const Cell* cell = row.cell(member);
            std::string raw = cell ? cell->raw : std::string();
            any = any || !raw.empty();
            m.attributes.emplace_back(member.attribute_role(), raw);
            m.anchor.columns.push_back(member.name);
          }
          if (any) out.push_back(std::move(m));
        } else if (const auto* voc = std::get_if<VocabTermField>(&column.kind)) {
          const Cell* cell = row.cell(column);
          if (!cell || cell->empty()) continue;
          Mention m;
          m.kind = MentionKind::kTerm;
          m.vocabulary = voc->vocabulary;
          m.raw = cell->raw;
          m.anchor = Anchor{record.id, table.name, r, {column.name}};
          out.push_back(std::move(m));
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical documents
// ---------------------------------------------------------------------------

Json template_to_json(const Template& t) {
  Json tables = Json::array();
  for (const auto& table : t.tables) tables.push_back(table_to_json(table));
  return Json{{"format_version", kFormatVersion}, {"id", t.id},           {"name", t.name},
              {"version", t.version},             {"vocabularies", t.vocabularies},
              {"tables", tables}};
}

Template template_from_json(const Json& doc) {
  check_format_version(doc, "template");
  Template t;
  t.id = require_string(doc, "id", "template");
  t.name = doc.value("name", t.id);
  t.version = doc.value("version", 1);
  if (doc.contains("vocabularies")) {
    t.vocabularies = doc.at("vocabularies").get<std::vector<std::string>>();
  }
  for (const auto& table : require(doc, "tables", "template " + t.id)) {
    t.tables.push_back(table_from_json(table, t.id));
  }
  return t;
}

Json record_to_json(const Record& r) {
  Json tables = Json::object();
  for (const auto& [name, rows] : r.tables) {
    Json arr = Json::array();
    for (const auto& row : rows) {
      Json cells = Json::object();
      for (const auto& [col, cell] : row.cells) {
        Json c{{"raw", cell.raw}};
        if (cell.note) c["note"] = *cell.note;
        cells[col] = c;
      }
      Json jr{{"cells", cells}};
      if (row.deleted) jr["deleted"] = true;
      arr.push_back(jr);
    }
    tables[name] = arr;
  }
  return Json{{"format_version", kFormatVersion},
              {"id", r.id},
              {"template", {{"id", r.template_id}, {"version", r.template_version}}},
              {"metadata",
               {{"created", r.metadata.created},
                {"modified", r.metadata.modified},
                {"transcriber", r.metadata.transcriber}}},
              {"tables", tables}};
}

Record record_from_json(const Json& doc) {
  check_format_version(doc, "record");
  Record r;
  r.id = require_string(doc, "id", "record");
  if (!text::is_identifier(r.id)) {
    throw Error(ErrorCode::kParseError, "record id '" + r.id + "' is not an identifier");
  }
  const Json& tmpl = require(doc, "template", "record " + r.id);
  r.template_id = require_string(tmpl, "id", "record " + r.id + " template");
  r.template_version = require(tmpl, "version", "record " + r.id + " template").get<int>();
  if (doc.contains("metadata")) {
    const Json& md = doc.at("metadata");
    r.metadata.created = md.value("created", "");
    r.metadata.modified = md.value("modified", "");
    r.metadata.transcriber = md.value("transcriber", "");
  }
  for (const auto& [name, rows] : require(doc, "tables", "record " + r.id).items()) {
    auto& out_rows = r.tables[name];
    for (const auto& jr : rows) {
      Row row;
      row.deleted = jr.value("deleted", false);
      for (const auto& [col, jc] : require(jr, "cells", "record " + r.id + " " + name).items()) {
        Cell cell;
        if (jc.is_string()) {
          cell.raw = jc.get<std::string>();
        } else {
          cell.raw = require_string(jc, "raw", "record " + r.id + " " + name + "." + col);
          if (jc.contains("note")) cell.note = jc.at("note").get<std::string>();
        }
        row.cells.emplace(col, std::move(cell));
      }
      out_rows.push_back(std::move(row));
    }
  }
  return r;
}

Json anchor_to_json(const Anchor& a) {
  return Json{{"record", a.record_id}, {"table", a.table}, {"row", a.row}, {"columns", a.columns}};
}

Anchor anchor_from_json(const Json& doc) {
  Anchor a;
  a.record_id = require_string(doc, "record", "anchor");
  a.table = require_string(doc, "table", "anchor");
  a.row = require(doc, "row", "anchor").get<std::size_t>();
  a.columns = require(doc, "columns", "anchor").get<std::vector<std::string>>();
  return a;
}

Json mention_to_json(const Mention& m) {
  Json j{{"anchor", anchor_to_json(m.anchor)}};
  if (m.kind == MentionKind::kEntity) {
    j["kind"] = "entity";
    j["entity_type"] = m.entity_type;
    j["group"] = m.group;
    Json attrs = Json::array();
    for (const auto& [role, raw] : m.attributes) attrs.push_back({role, raw});
    j["attributes"] = attrs;
  } else {
    j["kind"] = "term";
    j["vocabulary"] = m.vocabulary;
    j["raw"] = m.raw;
  }
  return j;
}

std::string serialize_record(const Record& r) { return to_canonical(record_to_json(r)); }

Record parse_record(std::string_view text) {
  try {
    return record_from_json(parse_document(text, "record"));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("record: ") + e.what());
  }
}

std::string serialize_template(const Template& t) { return to_canonical(template_to_json(t)); }

Template parse_template(std::string_view text) {
  try {
    return template_from_json(parse_document(text, "template"));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("template: ") + e.what());
  }
}

TemplateChange template_change_from_json(const Json& doc) {
  const std::string ctx = "template change";
  TemplateChange change;
  for (const auto& op : require(doc, "ops", ctx)) {
    std::string kind = require_string(op, "op", ctx);
    if (kind == "add-table") {
      change.ops.push_back(AddTable{table_from_json(require(op, "table", ctx), ctx)});
    } else if (kind == "add-column") {
      change.ops.push_back(AddColumn{require_string(op, "table", ctx), column_from_json(require(op, "column", ctx), ctx)});
    } else if (kind == "rename-column") {
      change.ops.push_back(
          RenameColumn{require_string(op, "table", ctx), require_string(op, "from", ctx), require_string(op, "to", ctx)});
    } else if (kind == "add-vocabulary") {
      change.ops.push_back(AddVocabulary{require_string(op, "name", ctx)});
    } else if (kind == "delete-table") {
      change.ops.push_back(DeleteTable{require_string(op, "table", ctx)});
    } else if (kind == "delete-column") {
      change.ops.push_back(DeleteColumn{require_string(op, "table", ctx), require_string(op, "column", ctx)});
    } else {
      throw Error(ErrorCode::kParseError, ctx + ": unknown op '" + kind + "'");
    }
  }
  return change;
}

Json template_change_to_json(const TemplateChange& change) {
  Json ops = Json::array();
  for (const auto& op : change.ops) {
    ops.push_back(std::visit(
        Overloaded{
            [](const AddTable& o) -> Json { return {{"op", "add-table"}, {"table", table_to_json(o.table)}}; },
            [](const AddColumn& o) -> Json {
              return {{"op", "add-column"}, {"table", o.table}, {"column", column_to_json(o.column)}};
            },
            [](const RenameColumn& o) -> Json {
              return {{"op", "rename-column"}, {"table", o.table}, {"from", o.from}, {"to", o.to}};
            },
            [](const AddVocabulary& o) -> Json { return {{"op", "add-vocabulary"}, {"name", o.name}}; },
            [](const DeleteTable& o) -> Json { return {{"op", "delete-table"}, {"table", o.table}}; },
            [](const DeleteColumn& o) -> Json {
              return {{"op", "delete-column"}, {"table", o.table}, {"column", o.column}};
            },
        },
        op));
  }
  return {{"ops", ops}};
}

}  // namespace archgraph
