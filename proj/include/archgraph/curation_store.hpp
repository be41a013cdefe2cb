#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "archgraph/record_model.hpp"

namespace archgraph {

using Attributes = std::vector<std::pair<std::string, std::string>>;  // role -> raw

struct MatchRule {
  std::string entity_type;
  std::vector<std::string> key_roles;
  bool trim = true;
  bool case_fold = true;
  bool collapse_whitespace = true;

  std::string normalize(std::string_view value) const;
  // Normalised key tuple, or nullopt when any key value is empty after
  // normalisation (such instances never auto-match).
  std::optional<std::vector<std::string>> key(const Attributes& attributes) const;
};

std::vector<MatchRule> parse_match_rules(std::string_view document);
Json match_rules_to_json(const std::vector<MatchRule>& rules);

struct LocalInstance {
  std::string local_id;
  std::string entity_type;
  std::string group;
  Attributes attributes;  // verbatim copies
  Anchor anchor;
  std::string master_id;

  // Raw value for a role, empty if absent.
  std::string attribute(const std::string& role) const;
};

struct MasterInstance {
  std::string master_id;
  std::string entity_type;
  std::map<std::string, std::string> preferred_attributes;
  std::map<std::string, std::string> enrichments;
  std::set<std::string> members;
};

// A durable "not the same" decision. The unmatched local keeps out of the key
// class computed from `key_snapshot` under any rule, and may not share a
// master with any of `peers`.
struct UnmatchException {
  std::string local_id;
  std::string excluded_master_id;
  Attributes key_snapshot;
  std::set<std::string> peers;
};

struct VocabularyTerm {
  std::string vocabulary;
  std::string raw;
  std::optional<std::string> preferred_term;
  std::optional<std::string> broader;  // raw term in the same vocabulary
  std::set<Anchor> appearances;
};

struct IngestReport {
  int new_locals = 0;
  int updated_locals = 0;
  int unchanged_locals = 0;
  int new_terms = 0;
  int new_appearances = 0;

  Json to_json() const;
};

struct MatchReport {
  int masters_before = 0;
  int masters_after = 0;
  int locals_considered = 0;
  // Unions skipped because they would put an unmatched pair back together.
  int blocked_unions = 0;

  Json to_json() const;
};

// Enrichment keys accepted on location masters.
inline const std::set<std::string>& location_enrichment_keys() {
  static const std::set<std::string> keys{"coordinates", "external_id", "secondary_name"};
  return keys;
}

// Curated identities for entities (locals grouped under masters) and
// vocabulary terms. Raw transcript values are never modified: corrections
// live on masters and terms as separate fields.
class CurationStore {
 public:
  using AnchorResolver = std::function<bool(const Anchor&)>;

  explicit CurationStore(std::set<std::string> entity_types = {"person", "ship", "location",
                                                               "legal-entity"});

  IngestReport ingest_mentions(const std::vector<Mention>& mentions,
                               const AnchorResolver& resolver = {});

  MatchReport auto_match(const std::vector<MatchRule>& rules);

  // Ids may name locals or masters (tombstoned masters follow their
  // redirect). Returns the surviving master id.
  std::string manual_match(const std::set<std::string>& ids);

  // Returns the local's new singleton master id.
  std::string unmatch(const std::string& local_id);

  MasterInstance set_preferred(const std::string& master_id, const std::string& role,
                               const std::string& value);
  MasterInstance set_enrichment(const std::string& master_id, const std::string& key,
                                const std::string& value);
  VocabularyTerm set_preferred_term(const std::string& vocabulary, const std::string& raw,
                                    const std::string& preferred);
  VocabularyTerm set_broader(const std::string& vocabulary, const std::string& raw,
                             const std::string& broader_raw);

  std::vector<Anchor> list_appearances(const std::string& master_or_local_id) const;
  std::vector<Anchor> list_term_appearances(const std::string& vocabulary,
                                            const std::string& raw) const;

  // Snapshot accessors (copies; safe while other threads mutate).
  std::map<std::string, LocalInstance> locals() const;
  std::map<std::string, MasterInstance> masters() const;
  std::map<std::pair<std::string, std::string>, VocabularyTerm> terms() const;
  std::vector<UnmatchException> exceptions() const;
  std::map<std::string, std::string> redirects() const;
  std::vector<std::string> merge_log() const;
  std::vector<MatchRule> last_rules() const;

  std::optional<LocalInstance> find_local(const std::string& local_id) const;
  std::optional<MasterInstance> find_master(const std::string& master_id) const;
  // Follows redirects of tombstoned masters.
  std::string resolve_master(const std::string& master_id) const;

  // True iff masters partition the locals of every type and every pointer is
  // consistent. Used by tests after operation sequences.
  bool check_partition(std::string* why = nullptr) const;

  Json to_json() const;
  // Replaces the whole state with a document produced by to_json().
  void restore(const Json& doc);

  const std::set<std::string>& entity_types() const { return entity_types_; }

 private:
  struct State {
    std::map<std::string, LocalInstance> locals;
    std::map<std::string, std::string> anchor_index;  // anchor key -> local id
    std::map<std::string, MasterInstance> masters;
    std::map<std::string, std::string> redirects;
    std::map<std::string, std::set<std::string>> manual_clusters;  // cluster id -> locals
    std::map<std::string, std::string> manual_of;                   // local -> cluster id
    std::vector<std::set<std::string>> auto_groups;
    std::vector<UnmatchException> exceptions;
    std::map<std::pair<std::string, std::string>, VocabularyTerm> terms;
    std::map<std::string, std::pair<std::string, std::string>> term_anchor_index;
    std::vector<std::string> merge_log;
    std::vector<MatchRule> last_rules;
  };

  static bool blocked(const State& s, const std::string& a, const std::string& b);
  static bool excluded(const State& s, const LocalInstance& local, const MatchRule& rule);
  // Recomputes the partition of `entity_type` from manual clusters and auto
  // groups, then reconciles master identities.
  static void rebuild(State& s, const std::string& entity_type,
                      const std::optional<std::string>& evicted = {});
  std::string resolve_master_locked(const std::string& id) const;

  std::set<std::string> entity_types_;
  mutable std::shared_mutex mutex_;
  State state_;
};

Json local_to_json(const LocalInstance& l);
Json master_to_json(const MasterInstance& m);
Json term_to_json(const VocabularyTerm& t);

// Key identifying an entity mention's local instance (stable across edits).
std::string local_key(const Anchor& anchor, const std::string& entity_type,
                      const std::string& group);
std::string local_id_for(const Anchor& anchor, const std::string& entity_type,
                         const std::string& group);

}  // namespace archgraph
