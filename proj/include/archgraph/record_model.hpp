#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "archgraph/canonical_io.hpp"

namespace archgraph {

// ---------------------------------------------------------------------------
// Templates (source schemas)
// ---------------------------------------------------------------------------

struct PlainTextField {
  bool operator==(const PlainTextField&) const = default;
};
struct DateField {
  bool operator==(const DateField&) const = default;
};
struct NumberField {
  bool operator==(const NumberField&) const = default;
};
struct EntityRefField {
  std::string entity_type;
  bool operator==(const EntityRefField&) const = default;
};
struct VocabTermField {
  std::string vocabulary;
  bool operator==(const VocabTermField&) const = default;
};

using FieldKind =
    std::variant<PlainTextField, DateField, NumberField, EntityRefField, VocabTermField>;

std::string field_kind_name(const FieldKind& kind);

struct ColumnSpec {
  std::string name;
  FieldKind kind = PlainTextField{};
  // Informational: feeds completeness reporting, not validation (see
  // README, "Template evolution").
  bool required = false;
  // Entity-ref columns sharing a group (and entity type) form one mention.
  // Defaults to the column name.
  std::optional<std::string> entity_group;
  // Attribute role used by match rules. Defaults to the column name.
  std::optional<std::string> role;
  // Former names kept by renames.
  std::vector<std::string> aliases;

  std::string group() const { return entity_group.value_or(name); }
  std::string attribute_role() const { return role.value_or(name); }
  bool answers_to(const std::string& n) const;

  bool operator==(const ColumnSpec&) const = default;
};

struct TableSpec {
  std::string name;
  bool multi_row = true;
  std::vector<ColumnSpec> columns;

  const ColumnSpec* find_column(const std::string& name_or_alias) const;

  bool operator==(const TableSpec&) const = default;
};

struct Template {
  std::string id;
  std::string name;
  int version = 1;
  std::vector<std::string> vocabularies;
  std::vector<TableSpec> tables;

  const TableSpec* find_table(const std::string& name) const;

  bool operator==(const Template&) const = default;
};

// Checks the structural template invariants: unique table/column names,
// entity-ref types among `entity_types`, vocab-term vocabularies declared.
// Throws kInvalidChange (for evolution) or kParseError otherwise.
void check_template(const Template& t, const std::set<std::string>& entity_types);

struct AddTable {
  TableSpec table;
};
struct AddColumn {
  std::string table;
  ColumnSpec column;
};
struct RenameColumn {
  std::string table;
  std::string from;
  std::string to;
};
struct AddVocabulary {
  std::string name;
};
struct DeleteTable {
  std::string table;
};
struct DeleteColumn {
  std::string table;
  std::string column;
};

using TemplateChangeOp =
    std::variant<AddTable, AddColumn, RenameColumn, AddVocabulary, DeleteTable, DeleteColumn>;

struct TemplateChange {
  std::vector<TemplateChangeOp> ops;
};

// Applies an additive change and bumps the version. Deletions are rejected
// with kDestructiveChange, an empty change with kEmptyChange.
Template evolve_template(const Template& t, const TemplateChange& change,
                         const std::set<std::string>& entity_types);

// ---------------------------------------------------------------------------
// Records (transcripts)
// ---------------------------------------------------------------------------

struct Cell {
  std::string raw;  // verbatim, never normalised
  std::optional<std::string> note;

  bool empty() const { return raw.empty(); }
  bool operator==(const Cell&) const = default;
};

struct Row {
  std::map<std::string, Cell> cells;
  bool deleted = false;  // tombstone; keeps later row indexes stable

  // Looks a column up under its current name or any alias.
  const Cell* cell(const ColumnSpec& column) const;

  bool operator==(const Row&) const = default;
};

struct RecordMetadata {
  std::string created;
  std::string modified;
  std::string transcriber;

  bool operator==(const RecordMetadata&) const = default;
};

struct Record {
  std::string id;
  std::string template_id;
  int template_version = 1;
  RecordMetadata metadata;
  std::map<std::string, std::vector<Row>> tables;

  bool operator==(const Record&) const = default;
};

// Provenance unit: a set of cells in one row of one record.
struct Anchor {
  std::string record_id;
  std::string table;
  std::size_t row = 0;
  std::vector<std::string> columns;

  std::string to_string() const;
  auto operator<=>(const Anchor&) const = default;
};

struct Violation {
  std::string rule;      // UnknownTable, UnknownColumn, RowCardinality
  std::string location;  // Table or Table.column
  std::string message;

  std::string to_string() const { return rule + "@" + location; }
  bool operator==(const Violation&) const = default;
};

// Throws kTemplateNotFound if the record does not reference this exact
// template id and version.
std::vector<Violation> validate_record(const Record& record, const Template& tmpl);

// Rewrites aliased column keys to current names and re-targets the record at
// `tmpl` (a later version of its template).
Record upgrade_record(const Record& record, const Template& tmpl);

enum class MentionKind { kEntity, kTerm };

struct Mention {
  MentionKind kind = MentionKind::kEntity;
  std::string entity_type;  // entity mentions
  std::string group;        // entity mentions
  std::vector<std::pair<std::string, std::string>> attributes;  // role -> raw, column order
  std::string vocabulary;   // term mentions
  std::string raw;          // term mentions
  Anchor anchor;

  bool operator==(const Mention&) const = default;
};

std::vector<Mention> extract_mentions(const Record& record, const Template& tmpl);

// Canonical documents.
Json template_to_json(const Template& t);
Template template_from_json(const Json& doc);
Json record_to_json(const Record& r);
Record record_from_json(const Json& doc);
Json anchor_to_json(const Anchor& a);
Anchor anchor_from_json(const Json& doc);
Json mention_to_json(const Mention& m);

std::string serialize_record(const Record& r);
Record parse_record(std::string_view text);
std::string serialize_template(const Template& t);
// {"ops": [{"op": "add-table" | "add-column" | "rename-column" |
//           "add-vocabulary" | "delete-table" | "delete-column", ...}]}
TemplateChange template_change_from_json(const Json& doc);
Json template_change_to_json(const TemplateChange& change);
Template parse_template(std::string_view text);

}  // namespace archgraph
