#include "archgraph/curation_store.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

#include "archgraph/error.hpp"
#include "archgraph/hashing.hpp"
#include "archgraph/text.hpp"

namespace archgraph {

namespace {

std::string short_hash(std::vector<std::string> parts) {
  return content_hash(parts).substr(0, 16);
}

std::string term_anchor_key(const Anchor& a) {
  return a.record_id + '\x1f' + a.table + '\x1f' + std::to_string(a.row) + '\x1f' +
         text::join(a.columns, "+");
}

// Plain union-find over dense indexes.
class UnionFind {
 public:
  explicit UnionFind(size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  size_t find(size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  // Keeps the smaller index as root so component roots are deterministic.
  size_t unite(size_t a, size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return a;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    return a;
  }

 private:
  std::vector<size_t> parent_;
};

Json attributes_to_json(const Attributes& attrs) {
  Json out = Json::array();
  for (const auto& [role, raw] : attrs) out.push_back({role, raw});
  return out;
}

Attributes attributes_from_json(const Json& j) {
  Attributes out;
  for (const auto& pair : j) out.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Match rules
// ---------------------------------------------------------------------------

std::string MatchRule::normalize(std::string_view value) const {
  std::string v(value);
  if (trim) v = text::trim(v);
  if (collapse_whitespace) v = text::collapse_whitespace(v);
  if (case_fold) v = text::case_fold(v);
  return v;
}

std::optional<std::vector<std::string>> MatchRule::key(const Attributes& attributes) const {
  std::vector<std::string> out;
  out.reserve(key_roles.size());
  for (const auto& role : key_roles) {
    std::string value;
    for (const auto& [r, raw] : attributes) {
      if (r == role) {
        value = normalize(raw);
        break;
      }
    }
    if (value.empty()) return std::nullopt;
    out.push_back(std::move(value));
  }
  return out;
}

std::vector<MatchRule> parse_match_rules(std::string_view document) {
  Json doc = parse_document(document, "match rules");
  std::vector<MatchRule> rules;
  try {
    for (const auto& jr : require(doc, "rules", "match rules")) {
      MatchRule r;
      r.entity_type = require_string(jr, "entity_type", "match rule");
      r.key_roles = require(jr, "key_roles", "match rule").get<std::vector<std::string>>();
      if (r.key_roles.empty()) {
        throw Error(ErrorCode::kParseError, "match rule for " + r.entity_type + ": key_roles is empty");
      }
      if (jr.contains("normalization")) {
        auto flags = jr.at("normalization").get<std::vector<std::string>>();
        r.trim = r.case_fold = r.collapse_whitespace = false;
        for (const auto& f : flags) {
          if (f == "trim") {
            r.trim = true;
          } else if (f == "case-fold") {
            r.case_fold = true;
          } else if (f == "collapse-whitespace") {
            r.collapse_whitespace = true;
          } else {
            throw Error(ErrorCode::kParseError, "unknown normalization flag '" + f + "'");
          }
        }
      }
      rules.push_back(std::move(r));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("match rules: ") + e.what());
  }
  return rules;
}

Json match_rules_to_json(const std::vector<MatchRule>& rules) {
  Json arr = Json::array();
  for (const auto& r : rules) {
    Json flags = Json::array();
    if (r.trim) flags.push_back("trim");
    if (r.case_fold) flags.push_back("case-fold");
    if (r.collapse_whitespace) flags.push_back("collapse-whitespace");
    arr.push_back({{"entity_type", r.entity_type}, {"key_roles", r.key_roles}, {"normalization", flags}});
  }
  return Json{{"format_version", 1}, {"rules", arr}};
}

std::string LocalInstance::attribute(const std::string& role) const {
  for (const auto& [r, raw] : attributes) {
    if (r == role) return raw;
  }
  return {};
}

Json IngestReport::to_json() const {
  return Json{{"new_locals", new_locals},           {"updated_locals", updated_locals},
              {"unchanged_locals", unchanged_locals}, {"new_terms", new_terms},
              {"new_appearances", new_appearances}};
}

Json MatchReport::to_json() const {
  return Json{{"masters_before", masters_before},
              {"masters_after", masters_after},
              {"locals_considered", locals_considered},
              {"blocked_unions", blocked_unions}};
}

std::string local_key(const Anchor& anchor, const std::string& entity_type,
                      const std::string& group) {
  return anchor.record_id + '\x1f' + anchor.table + '\x1f' + std::to_string(anchor.row) + '\x1f' +
         entity_type + '\x1f' + group;
}

std::string local_id_for(const Anchor& anchor, const std::string& entity_type,
                         const std::string& group) {
  return "l-" + short_hash({"local", local_key(anchor, entity_type, group)});
}

// ---------------------------------------------------------------------------

CurationStore::CurationStore(std::set<std::string> entity_types)
    : entity_types_(std::move(entity_types)) {}

IngestReport CurationStore::ingest_mentions(const std::vector<Mention>& mentions,
                                            const AnchorResolver& resolver) {
  if (resolver) {
    for (const auto& m : mentions) {
      if (!resolver(m.anchor)) {
        throw Error(ErrorCode::kDanglingAnchor, "anchor " + m.anchor.to_string() + " does not resolve");
      }
    }
  }
  std::unique_lock lock(mutex_);
  State next = state_;
  IngestReport report;
  for (const auto& m : mentions) {
    if (m.kind == MentionKind::kEntity) {
      if (!entity_types_.contains(m.entity_type)) {
        throw Error(ErrorCode::kTypeMismatch, "unknown entity type " + m.entity_type);
      }
      std::string key = local_key(m.anchor, m.entity_type, m.group);
      if (auto it = next.anchor_index.find(key); it != next.anchor_index.end()) {
        LocalInstance& local = next.locals.at(it->second);
        if (local.attributes == m.attributes && local.anchor == m.anchor) {
          ++report.unchanged_locals;
        } else {
          local.attributes = m.attributes;
          local.anchor = m.anchor;
          ++report.updated_locals;
        }
        continue;
      }
      LocalInstance local;
      local.local_id = local_id_for(m.anchor, m.entity_type, m.group);
      local.entity_type = m.entity_type;
      local.group = m.group;
      local.attributes = m.attributes;
      local.anchor = m.anchor;
      std::string master_id = "m-" + short_hash({"master", key});
      for (int n = 0; next.masters.contains(master_id) || next.redirects.contains(master_id); ++n) {
        master_id = "m-" + short_hash({"master", key, std::to_string(n)});
      }
      local.master_id = master_id;
      next.masters[master_id] = MasterInstance{master_id, m.entity_type, {}, {}, {local.local_id}};
      next.anchor_index[key] = local.local_id;
      next.locals[local.local_id] = std::move(local);
      ++report.new_locals;
    } else {
      std::string akey = term_anchor_key(m.anchor);
      auto term_key = std::make_pair(m.vocabulary, m.raw);
      if (auto it = next.term_anchor_index.find(akey); it != next.term_anchor_index.end()) {
        if (it->second == term_key) continue;
        // The cell now holds a different term: move the appearance.
        next.terms.at(it->second).appearances.erase(m.anchor);
      }
      auto [tit, inserted] = next.terms.try_emplace(term_key);
      if (inserted) {
        tit->second.vocabulary = m.vocabulary;
        tit->second.raw = m.raw;
        ++report.new_terms;
      }
      if (tit->second.appearances.insert(m.anchor).second) ++report.new_appearances;
      next.term_anchor_index[akey] = term_key;
    }
  }
  state_ = std::move(next);
  return report;
}

bool CurationStore::blocked(const State& s, const std::string& a, const std::string& b) {
  for (const auto& e : s.exceptions) {
    if ((e.local_id == a && e.peers.contains(b)) || (e.local_id == b && e.peers.contains(a))) {
      return true;
    }
  }
  return false;
}

bool CurationStore::excluded(const State& s, const LocalInstance& local, const MatchRule& rule) {
  auto current = rule.key(local.attributes);
  if (!current) return false;
  for (const auto& e : s.exceptions) {
    if (e.local_id != local.local_id) continue;
    if (rule.key(e.key_snapshot) == current) return true;
  }
  return false;
}

void CurationStore::rebuild(State& s, const std::string& entity_type,
                            const std::optional<std::string>& evicted) {
  std::vector<std::string> ids;
  for (const auto& [id, local] : s.locals) {
    if (local.entity_type == entity_type) ids.push_back(id);
  }
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

  UnionFind uf(ids.size());
  auto unite_all = [&](const std::set<std::string>& members) {
    std::optional<size_t> first;
    for (const auto& m : members) {
      auto it = index.find(m);
      if (it == index.end()) continue;
      if (!first) {
        first = it->second;
      } else {
        uf.unite(*first, it->second);
      }
    }
  };
  for (const auto& [_, members] : s.manual_clusters) unite_all(members);
  for (const auto& members : s.auto_groups) unite_all(members);

  // Components keyed by root index; members ascend because ids are sorted.
  std::map<size_t, std::vector<std::string>> components;
  for (size_t i = 0; i < ids.size(); ++i) components[uf.find(i)].push_back(ids[i]);

  // Each old master goes to the component holding most of its members; ties
  // prefer the component without the evicted local, then the smallest one.
  std::map<size_t, std::set<std::string>> claims;
  std::vector<std::string> old_masters;
  for (const auto& [mid, master] : s.masters) {
    if (master.entity_type != entity_type) continue;
    old_masters.push_back(mid);
    std::map<size_t, size_t> counts;
    for (const auto& member : master.members) {
      if (auto it = index.find(member); it != index.end()) ++counts[uf.find(it->second)];
    }
    if (counts.empty()) continue;
    auto better = [&](size_t a, size_t b) {  // is a better than b
      if (counts[a] != counts[b]) return counts[a] > counts[b];
      if (evicted) {
        auto has = [&](size_t c) {
          const auto& v = components[c];
          return std::find(v.begin(), v.end(), *evicted) != v.end();
        };
        if (has(a) != has(b)) return !has(a);
      }
      return components[a].front() < components[b].front();
    };
    size_t best = counts.begin()->first;
    for (const auto& [c, _] : counts) {
      if (better(c, best)) best = c;
    }
    claims[best].insert(mid);
  }

  std::map<std::string, MasterInstance> rebuilt;
  std::set<std::string> taken;
  for (auto& [root, members] : components) {
    MasterInstance master;
    auto cit = claims.find(root);
    if (cit != claims.end() && !cit->second.empty()) {
      const std::string survivor = *cit->second.begin();
      master = s.masters.at(survivor);
      for (const auto& loser : cit->second) {
        if (loser == survivor) continue;
        const MasterInstance& lm = s.masters.at(loser);
        for (const auto& [k, v] : lm.preferred_attributes) {
          s.merge_log.push_back("merge " + loser + " -> " + survivor + ": dropped preferred " + k +
                                "=" + v);
        }
        for (const auto& [k, v] : lm.enrichments) {
          s.merge_log.push_back("merge " + loser + " -> " + survivor + ": dropped enrichment " + k +
                                "=" + v);
        }
        s.redirects[loser] = survivor;
      }
    } else {
      std::string fresh;
      for (int n = 0;; ++n) {
        fresh = "m-" + short_hash({"split", members.front(), std::to_string(n)});
        if (!s.masters.contains(fresh) && !s.redirects.contains(fresh) && !taken.contains(fresh)) {
          break;
        }
      }
      master.master_id = fresh;
      master.entity_type = entity_type;
    }
    master.members = std::set<std::string>(members.begin(), members.end());
    taken.insert(master.master_id);
    for (const auto& m : members) s.locals.at(m).master_id = master.master_id;
    rebuilt[master.master_id] = std::move(master);
  }
  for (const auto& mid : old_masters) {
    if (!rebuilt.contains(mid)) s.masters.erase(mid);
  }
  for (auto& [mid, master] : rebuilt) {
    s.redirects.erase(mid);
    s.masters[mid] = std::move(master);
  }
}

MatchReport CurationStore::auto_match(const std::vector<MatchRule>& rules) {
  std::unique_lock lock(mutex_);
  State next = state_;
  std::set<std::string> types;
  std::map<std::string, std::set<std::string>> known_roles;
  for (const auto& [_, local] : next.locals) {
    for (const auto& [role, __] : local.attributes) known_roles[local.entity_type].insert(role);
  }
  for (const auto& rule : rules) {
    if (!entity_types_.contains(rule.entity_type)) {
      throw Error(ErrorCode::kUnknownRole, "unknown entity type " + rule.entity_type);
    }
    if (rule.key_roles.empty()) {
      throw Error(ErrorCode::kUnknownRole, "rule for " + rule.entity_type + " has no key roles");
    }
    if (auto it = known_roles.find(rule.entity_type); it != known_roles.end()) {
      for (const auto& role : rule.key_roles) {
        if (!it->second.contains(role)) {
          throw Error(ErrorCode::kUnknownRole,
                      "role '" + role + "' unknown for entity type " + rule.entity_type);
        }
      }
    }
    types.insert(rule.entity_type);
  }

  MatchReport report;
  for (const auto& [_, m] : next.masters) {
    if (types.contains(m.entity_type)) ++report.masters_before;
  }

  // Auto groups of the matched types are recomputed from scratch.
  std::erase_if(next.auto_groups, [&](const std::set<std::string>& g) {
    return !g.empty() && types.contains(next.locals.at(*g.begin()).entity_type);
  });

  std::vector<std::string> ids;
  for (const auto& [id, local] : next.locals) {
    if (types.contains(local.entity_type)) ids.push_back(id);
  }
  report.locals_considered = static_cast<int>(ids.size());
  std::map<std::string, size_t> index;
  for (size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

  std::map<std::string, std::set<std::string>> blocked_peers;
  for (const auto& e : next.exceptions) {
    for (const auto& p : e.peers) {
      blocked_peers[e.local_id].insert(p);
      blocked_peers[p].insert(e.local_id);
    }
  }
  UnionFind uf(ids.size());
  std::vector<std::set<std::string>> comp_members(ids.size());
  std::vector<std::set<std::string>> comp_blocked(ids.size());
  for (size_t i = 0; i < ids.size(); ++i) {
    comp_members[i] = {ids[i]};
    if (auto it = blocked_peers.find(ids[i]); it != blocked_peers.end()) comp_blocked[i] = it->second;
  }
  auto merge = [&](size_t a, size_t b) {
    a = uf.find(a);
    b = uf.find(b);
    if (a == b) return;
    size_t root = uf.unite(a, b);
    size_t other = root == a ? b : a;
    comp_members[root].merge(comp_members[other]);
    comp_blocked[root].merge(comp_blocked[other]);
    comp_members[other].clear();
    comp_blocked[other].clear();
  };
  auto conflicts = [&](size_t a, size_t b) {
    a = uf.find(a);
    b = uf.find(b);
    const auto& small = comp_members[a].size() < comp_members[b].size() ? comp_members[a] : comp_members[b];
    const auto& other_blocked = &small == &comp_members[a] ? comp_blocked[b] : comp_blocked[a];
    for (const auto& m : small) {
      if (other_blocked.contains(m)) return true;
    }
    return false;
  };
  for (const auto& [_, members] : next.manual_clusters) {
    std::optional<size_t> first;
    for (const auto& m : members) {
      auto it = index.find(m);
      if (it == index.end()) continue;
      if (first) merge(*first, it->second); else first = it->second;
    }
  }

  for (const auto& rule : rules) {
    std::map<std::vector<std::string>, std::vector<std::string>> buckets;
    for (const auto& id : ids) {
      const LocalInstance& local = next.locals.at(id);
      if (local.entity_type != rule.entity_type) continue;
      auto key = rule.key(local.attributes);
      if (!key || excluded(next, local, rule)) continue;
      buckets[*key].push_back(id);
    }
    // First-fit within each key class: a local joins the earliest group it
    // is not peer-blocked from, so any two groups left apart are blocked.
    for (const auto& [_, bucket] : buckets) {
      if (bucket.size() < 2) continue;
      std::vector<size_t> heads;
      std::vector<std::set<std::string>> groups;
      for (const auto& id : bucket) {
        size_t node = index.at(id);
        bool placed = false;
        for (size_t g = 0; g < heads.size() && !placed; ++g) {
          if (uf.find(heads[g]) == uf.find(node)) {
            placed = true;
          } else if (conflicts(heads[g], node)) {
            ++report.blocked_unions;
          } else {
            merge(heads[g], node);
            placed = true;
          }
          if (placed) groups[g].insert(id);
        }
        if (!placed) {
          heads.push_back(node);
          groups.push_back({id});
        }
      }
      for (auto& g : groups) {
        if (g.size() >= 2) next.auto_groups.push_back(std::move(g));
      }
    }
  }

  std::erase_if(next.last_rules, [&](const MatchRule& r) { return types.contains(r.entity_type); });
  next.last_rules.insert(next.last_rules.end(), rules.begin(), rules.end());
  for (const auto& t : types) rebuild(next, t);
  for (const auto& [_, m] : next.masters) {
    if (types.contains(m.entity_type)) ++report.masters_after;
  }
  state_ = std::move(next);
  return report;
}

std::string CurationStore::resolve_master_locked(const std::string& id) const {
  std::string cur = id;
  for (size_t guard = 0; guard <= state_.redirects.size(); ++guard) {
    if (state_.masters.contains(cur)) return cur;
    auto it = state_.redirects.find(cur);
    if (it == state_.redirects.end()) break;
    cur = it->second;
  }
  throw Error(ErrorCode::kUnknownTarget, "unknown master " + id);
}

std::string CurationStore::resolve_master(const std::string& master_id) const {
  std::shared_lock lock(mutex_);
  return resolve_master_locked(master_id);
}

std::string CurationStore::manual_match(const std::set<std::string>& ids) {
  std::unique_lock lock(mutex_);
  if (ids.empty()) throw Error(ErrorCode::kUnknownTarget, "nothing to match");
  State next = state_;
  std::set<std::string> locals;
  std::set<std::string> link;  // locals joined into the manual cluster
  for (const auto& id : ids) {
    if (next.locals.contains(id)) {
      locals.insert(id);
      link.insert(id);
    } else {
      const auto& members = next.masters.at(resolve_master_locked(id)).members;
      locals.insert(members.begin(), members.end());
      link.insert(members.begin(), members.end());
    }
  }
  std::string type = next.locals.at(*locals.begin()).entity_type;
  for (const auto& l : locals) {
    if (next.locals.at(l).entity_type != type) {
      throw Error(ErrorCode::kTypeMismatch,
                  "cannot match " + type + " with " + next.locals.at(l).entity_type);
    }
  }
  // Every member of every involved master ends up together.
  std::set<std::string> involved_masters;
  for (const auto& l : locals) involved_masters.insert(next.locals.at(l).master_id);
  std::vector<std::string> all;
  for (const auto& m : involved_masters) {
    const auto& members = next.masters.at(m).members;
    all.insert(all.end(), members.begin(), members.end());
  }
  for (size_t i = 0; i < all.size(); ++i) {
    for (size_t j = i + 1; j < all.size(); ++j) {
      if (blocked(next, all[i], all[j])) {
        throw Error(ErrorCode::kExceptionConflict,
                    all[i] + " and " + all[j] + " were explicitly unmatched");
      }
    }
  }
  if (involved_masters.size() == 1 && link.size() == 1) return *involved_masters.begin();

  std::set<std::string> cluster = link;
  for (const auto& l : link) {
    if (auto it = next.manual_of.find(l); it != next.manual_of.end()) {
      auto cit = next.manual_clusters.find(it->second);
      if (cit == next.manual_clusters.end()) continue;  // already folded in
      cluster.insert(cit->second.begin(), cit->second.end());
      next.manual_clusters.erase(cit);
    }
  }
  std::string cid = "c-" + *cluster.begin();
  for (const auto& l : cluster) next.manual_of[l] = cid;
  next.manual_clusters[cid] = cluster;
  rebuild(next, type);
  std::string result = next.locals.at(*locals.begin()).master_id;
  state_ = std::move(next);
  return result;
}

std::string CurationStore::unmatch(const std::string& local_id) {
  std::unique_lock lock(mutex_);
  State next = state_;
  auto lit = next.locals.find(local_id);
  if (lit == next.locals.end()) throw Error(ErrorCode::kUnknownTarget, "unknown local " + local_id);
  const MasterInstance& master = next.masters.at(lit->second.master_id);
  if (master.members.size() < 2) {
    throw Error(ErrorCode::kAlreadySingleton, local_id + " is the only member of " + master.master_id);
  }
  UnmatchException e;
  e.local_id = local_id;
  e.excluded_master_id = master.master_id;
  e.key_snapshot = lit->second.attributes;
  e.peers = master.members;
  e.peers.erase(local_id);
  next.exceptions.push_back(std::move(e));

  if (auto it = next.manual_of.find(local_id); it != next.manual_of.end()) {
    auto cit = next.manual_clusters.find(it->second);
    cit->second.erase(local_id);
    next.manual_of.erase(it);
    if (cit->second.size() < 2) {
      for (const auto& l : cit->second) next.manual_of.erase(l);
      next.manual_clusters.erase(cit);
    }
  }
  for (auto& g : next.auto_groups) g.erase(local_id);
  std::erase_if(next.auto_groups, [](const std::set<std::string>& g) { return g.size() < 2; });

  std::string type = lit->second.entity_type;
  rebuild(next, type, local_id);
  std::string result = next.locals.at(local_id).master_id;
  state_ = std::move(next);
  return result;
}

MasterInstance CurationStore::set_preferred(const std::string& master_id, const std::string& role,
                                            const std::string& value) {
  std::unique_lock lock(mutex_);
  auto& master = state_.masters.at(resolve_master_locked(master_id));
  master.preferred_attributes[role] = value;
  return master;
}

MasterInstance CurationStore::set_enrichment(const std::string& master_id, const std::string& key,
                                             const std::string& value) {
  std::unique_lock lock(mutex_);
  auto& master = state_.masters.at(resolve_master_locked(master_id));
  if (master.entity_type != "location" || !location_enrichment_keys().contains(key)) {
    throw Error(ErrorCode::kInvalidEnrichment,
                "enrichment '" + key + "' not accepted on " + master.entity_type + " masters");
  }
  master.enrichments[key] = value;
  return master;
}

VocabularyTerm CurationStore::set_preferred_term(const std::string& vocabulary,
                                                 const std::string& raw,
                                                 const std::string& preferred) {
  std::unique_lock lock(mutex_);
  auto it = state_.terms.find({vocabulary, raw});
  if (it == state_.terms.end()) {
    throw Error(ErrorCode::kUnknownTarget, "unknown term '" + raw + "' in " + vocabulary);
  }
  it->second.preferred_term = preferred;
  return it->second;
}

VocabularyTerm CurationStore::set_broader(const std::string& vocabulary, const std::string& raw,
                                          const std::string& broader_raw) {
  std::unique_lock lock(mutex_);
  auto it = state_.terms.find({vocabulary, raw});
  auto bit = state_.terms.find({vocabulary, broader_raw});
  if (it == state_.terms.end() || bit == state_.terms.end()) {
    throw Error(ErrorCode::kUnknownTerm,
                "unknown term '" + (it == state_.terms.end() ? raw : broader_raw) + "' in " + vocabulary);
  }
  std::optional<std::string> cur = broader_raw;
  for (size_t steps = 0; cur && steps <= state_.terms.size(); ++steps) {
    if (*cur == raw) {
      throw Error(ErrorCode::kCycleDetected,
                  "broader link " + raw + " -> " + broader_raw + " would close a cycle");
    }
    cur = state_.terms.at({vocabulary, *cur}).broader;
  }
  it->second.broader = broader_raw;
  return it->second;
}

std::vector<Anchor> CurationStore::list_appearances(const std::string& id) const {
  std::shared_lock lock(mutex_);
  if (auto it = state_.locals.find(id); it != state_.locals.end()) return {it->second.anchor};
  std::vector<Anchor> out;
  for (const auto& l : state_.masters.at(resolve_master_locked(id)).members) {
    out.push_back(state_.locals.at(l).anchor);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Anchor> CurationStore::list_term_appearances(const std::string& vocabulary,
                                                         const std::string& raw) const {
  std::shared_lock lock(mutex_);
  auto it = state_.terms.find({vocabulary, raw});
  if (it == state_.terms.end()) {
    throw Error(ErrorCode::kUnknownTarget, "unknown term '" + raw + "' in " + vocabulary);
  }
  return {it->second.appearances.begin(), it->second.appearances.end()};
}

std::map<std::string, LocalInstance> CurationStore::locals() const {
  std::shared_lock lock(mutex_);
  return state_.locals;
}

std::map<std::string, MasterInstance> CurationStore::masters() const {
  std::shared_lock lock(mutex_);
  return state_.masters;
}

std::map<std::pair<std::string, std::string>, VocabularyTerm> CurationStore::terms() const {
  std::shared_lock lock(mutex_);
  return state_.terms;
}

std::vector<UnmatchException> CurationStore::exceptions() const {
  std::shared_lock lock(mutex_);
  return state_.exceptions;
}

std::map<std::string, std::string> CurationStore::redirects() const {
  std::shared_lock lock(mutex_);
  return state_.redirects;
}

std::vector<std::string> CurationStore::merge_log() const {
  std::shared_lock lock(mutex_);
  return state_.merge_log;
}

std::vector<MatchRule> CurationStore::last_rules() const {
  std::shared_lock lock(mutex_);
  return state_.last_rules;
}

std::optional<LocalInstance> CurationStore::find_local(const std::string& local_id) const {
  std::shared_lock lock(mutex_);
  auto it = state_.locals.find(local_id);
  if (it == state_.locals.end()) return std::nullopt;
  return it->second;
}

std::optional<MasterInstance> CurationStore::find_master(const std::string& master_id) const {
  std::shared_lock lock(mutex_);
  auto it = state_.masters.find(master_id);
  if (it == state_.masters.end()) return std::nullopt;
  return it->second;
}

bool CurationStore::check_partition(std::string* why) const {
  std::shared_lock lock(mutex_);
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::set<std::string> seen;
  for (const auto& [mid, master] : state_.masters) {
    if (master.members.empty()) return fail("empty master " + mid);
    if (state_.locals.contains(mid)) return fail("master id clashes with a local: " + mid);
    for (const auto& l : master.members) {
      auto it = state_.locals.find(l);
      if (it == state_.locals.end()) return fail("master " + mid + " lists unknown local " + l);
      if (it->second.master_id != mid) return fail("local " + l + " points elsewhere");
      if (it->second.entity_type != master.entity_type) return fail("mixed types in " + mid);
      if (!seen.insert(l).second) return fail("local " + l + " in two masters");
    }
  }
  if (seen.size() != state_.locals.size()) return fail("some locals have no master");
  return true;
}

// ---------------------------------------------------------------------------
// Canonical state document
// ---------------------------------------------------------------------------

Json local_to_json(const LocalInstance& l) {
  return {{"id", l.local_id},
          {"entity_type", l.entity_type},
          {"group", l.group},
          {"attributes", attributes_to_json(l.attributes)},
          {"anchor", anchor_to_json(l.anchor)},
          {"master", l.master_id}};
}

Json master_to_json(const MasterInstance& m) {
  return {{"id", m.master_id},
          {"entity_type", m.entity_type},
          {"preferred", m.preferred_attributes},
          {"enrichments", m.enrichments},
          {"members", m.members}};
}

Json term_to_json(const VocabularyTerm& t) {
  Json jt{{"vocabulary", t.vocabulary}, {"raw", t.raw}};
  if (t.preferred_term) jt["preferred"] = *t.preferred_term;
  if (t.broader) jt["broader"] = *t.broader;
  Json apps = Json::array();
  for (const auto& a : t.appearances) apps.push_back(anchor_to_json(a));
  jt["appearances"] = apps;
  return jt;
}

Json CurationStore::to_json() const {
  std::shared_lock lock(mutex_);
  const State& s = state_;
  Json locals = Json::array();
  for (const auto& [_, l] : s.locals) locals.push_back(local_to_json(l));
  Json masters = Json::array();
  for (const auto& [_, m] : s.masters) masters.push_back(master_to_json(m));
  Json clusters = Json::object();
  for (const auto& [cid, members] : s.manual_clusters) clusters[cid] = members;
  Json exceptions = Json::array();
  for (const auto& e : s.exceptions) {
    exceptions.push_back({{"local", e.local_id},
                          {"excluded_master", e.excluded_master_id},
                          {"key_snapshot", attributes_to_json(e.key_snapshot)},
                          {"peers", e.peers}});
  }
  Json terms = Json::array();
  for (const auto& [_, t] : s.terms) terms.push_back(term_to_json(t));
  return Json{{"format_version", 1},
              {"entity_types", entity_types_},
              {"locals", locals},
              {"masters", masters},
              {"redirects", s.redirects},
              {"manual_clusters", clusters},
              {"auto_groups", s.auto_groups},
              {"exceptions", exceptions},
              {"terms", terms},
              {"merge_log", s.merge_log},
              {"rules", match_rules_to_json(s.last_rules).at("rules")}};
}

void CurationStore::restore(const Json& doc) {
  try {
    auto types = doc.at("entity_types").get<std::set<std::string>>();
    State s;
    for (const auto& jl : doc.at("locals")) {
      LocalInstance l;
      l.local_id = jl.at("id").get<std::string>();
      l.entity_type = jl.at("entity_type").get<std::string>();
      l.group = jl.at("group").get<std::string>();
      l.attributes = attributes_from_json(jl.at("attributes"));
      l.anchor = anchor_from_json(jl.at("anchor"));
      l.master_id = jl.at("master").get<std::string>();
      s.anchor_index[local_key(l.anchor, l.entity_type, l.group)] = l.local_id;
      s.locals[l.local_id] = std::move(l);
    }
    for (const auto& jm : doc.at("masters")) {
      MasterInstance m;
      m.master_id = jm.at("id").get<std::string>();
      m.entity_type = jm.at("entity_type").get<std::string>();
      m.preferred_attributes = jm.at("preferred").get<std::map<std::string, std::string>>();
      m.enrichments = jm.at("enrichments").get<std::map<std::string, std::string>>();
      m.members = jm.at("members").get<std::set<std::string>>();
      s.masters[m.master_id] = std::move(m);
    }
    s.redirects = doc.at("redirects").get<std::map<std::string, std::string>>();
    for (const auto& [cid, members] : doc.at("manual_clusters").items()) {
      auto set = members.get<std::set<std::string>>();
      for (const auto& l : set) s.manual_of[l] = cid;
      s.manual_clusters[cid] = std::move(set);
    }
    s.auto_groups = doc.at("auto_groups").get<std::vector<std::set<std::string>>>();
    for (const auto& je : doc.at("exceptions")) {
      s.exceptions.push_back({je.at("local").get<std::string>(),
                              je.at("excluded_master").get<std::string>(),
                              attributes_from_json(je.at("key_snapshot")),
                              je.at("peers").get<std::set<std::string>>()});
    }
    for (const auto& jt : doc.at("terms")) {
      VocabularyTerm t;
      t.vocabulary = jt.at("vocabulary").get<std::string>();
      t.raw = jt.at("raw").get<std::string>();
      if (jt.contains("preferred")) t.preferred_term = jt.at("preferred").get<std::string>();
      if (jt.contains("broader")) t.broader = jt.at("broader").get<std::string>();
      for (const auto& ja : jt.at("appearances")) {
        Anchor a = anchor_from_json(ja);
        s.term_anchor_index[term_anchor_key(a)] = {t.vocabulary, t.raw};
        t.appearances.insert(std::move(a));
      }
      s.terms[{t.vocabulary, t.raw}] = std::move(t);
    }
    s.merge_log = doc.at("merge_log").get<std::vector<std::string>>();
    s.last_rules = parse_match_rules(Json{{"rules", doc.at("rules")}}.dump());
    std::unique_lock lock(mutex_);
    entity_types_ = std::move(types);
    state_ = std::move(s);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kCorruptStore, std::string("curation state: ") + e.what());
  }
}

}  // namespace archgraph
