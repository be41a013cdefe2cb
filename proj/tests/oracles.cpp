#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <optional>

namespace archgraph::oracle {

namespace {

std::string normalise(std::string v, const MatchRule& rule) {
  auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  if (rule.trim) {
    while (!v.empty() && ws(v.front())) v.erase(v.begin());
    while (!v.empty() && ws(v.back())) v.pop_back();
  }
  if (rule.collapse_whitespace) {
    std::string out;
    bool in_ws = false;
    for (char c : v) {
      if (ws(c)) {
        if (!in_ws) out.push_back(' ');
        in_ws = true;
      } else {
        out.push_back(c);
        in_ws = false;
      }
    }
    v = out;
  }
  if (rule.case_fold) {
    for (char& c : v) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
  }
  return v;
}

std::optional<std::vector<std::string>> key_of(const Attributes& attrs, const MatchRule& rule) {
  std::vector<std::string> key;
  for (const auto& role : rule.key_roles) {
    std::string value;
    for (const auto& [r, raw] : attrs) {
      if (r == role) {
        value = normalise(raw, rule);
        break;
      }
    }
    if (value.empty()) return std::nullopt;
    key.push_back(value);
  }
  return key;
}

}  // namespace

Partition partition_of(const CurationStore& store, const std::string& entity_type) {
  Partition out;
  for (const auto& [_, m] : store.masters()) {
    if (m.entity_type == entity_type) out.insert(m.members);
  }
  return out;
}

Partition match_partition(const std::vector<LocalInstance>& locals, const std::vector<UnmatchException>& exceptions,
                          const std::vector<MatchRule>& rules, const std::string& entity_type) {
  std::vector<const LocalInstance*> ls;
  for (const auto& l : locals) {
    if (l.entity_type == entity_type) ls.push_back(&l);
  }
  std::sort(ls.begin(), ls.end(), [](auto* a, auto* b) { return a->local_id < b->local_id; });
  // cluster label per local
  std::map<std::string, int> label;
  for (size_t i = 0; i < ls.size(); ++i) label[ls[i]->local_id] = static_cast<int>(i);

  auto blocked_pair = [&](const std::string& a, const std::string& b) {
    for (const auto& e : exceptions) {
      if (e.local_id == a && e.peers.count(b)) return true;
      if (e.local_id == b && e.peers.count(a)) return true;
    }
    return false;
  };
  auto clusters_conflict = [&](int x, int y) {
    for (const auto& [a, la] : label) {
      if (la != x) continue;
      for (const auto& [b, lb] : label) {
        if (lb == y && blocked_pair(a, b)) return true;
      }
    }
    return false;
  };
  auto relabel = [&](int from, int to) {
    for (auto& [_, l] : label) {
      if (l == from) l = to;
    }
  };

  for (const auto& rule : rules) {
    if (rule.entity_type != entity_type) continue;
    std::map<std::vector<std::string>, std::vector<const LocalInstance*>> classes;
    for (const auto* l : ls) {
      auto key = key_of(l->attributes, rule);
      if (!key) continue;
      bool excluded = false;
      for (const auto& e : exceptions) {
        if (e.local_id == l->local_id && key_of(e.key_snapshot, rule) == key) excluded = true;
      }
      if (!excluded) classes[*key].push_back(l);
    }
    for (const auto& [_, members] : classes) {
      std::vector<std::string> heads;
      for (const auto* l : members) {
        bool placed = false;
        for (const auto& h : heads) {
          int lh = label[h];
          int ll = label[l->local_id];
          if (lh == ll) {
            placed = true;
            break;
          }
          if (clusters_conflict(lh, ll)) continue;
          relabel(ll, lh);
          placed = true;
          break;
        }
        if (!placed) heads.push_back(l->local_id);
      }
    }
  }
  std::map<int, std::set<std::string>> groups;
  for (const auto& [id, l] : label) groups[l].insert(id);
  Partition out;
  for (auto& [_, g] : groups) out.insert(std::move(g));
  return out;
}

MatchTrial match_trial(std::uint32_t seed, std::size_t n) {
  std::mt19937 rng(seed);
  auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
  const std::vector<std::string> first{"Agostino", "Giovanni", "Luigi", "Pietro", "Nikolaos", "Maria", "Antonio", "Giorgos"};
  const std::vector<std::string> last{"Brondi", "Rossi", "Ferrari", "Costa", "Vafiadakis", "Bianchi", "Russo", "Papadakis"};
  const std::vector<std::string> places{"Genova", "Camogli", "Syros", "Livorno", ""};
  std::size_t distinct = std::max<std::size_t>(2, n / 4);
  std::vector<std::string> base;
  for (std::size_t i = 0; i < distinct; ++i) base.push_back(pick(first) + " " + pick(last));

  auto variant = [&](std::string s) {
    switch (rng() % 6) {
      case 0: for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c))); break;
      case 1: s = "  " + s + " "; break;
      case 2: s.insert(s.find(' '), "  "); break;
      case 3: s[1] = '?'; break;
      default: break;
    }
    return s;
  };

  CurationStore store;
  std::vector<Mention> mentions;
  for (std::size_t i = 0; i < n; ++i) {
    Mention m;
    m.kind = MentionKind::kEntity;
    m.entity_type = "person";
    m.group = "name";
    m.attributes = {{"name", variant(base[rng() % base.size()])}, {"birth_place", pick(places)}};
    m.anchor = Anchor{"rec-" + std::to_string(i % 17), "crew", i, {"name", "birth_place"}};
    mentions.push_back(std::move(m));
  }
  store.ingest_mentions(mentions);

  auto random_rules = [&] {
    MatchRule r;
    r.entity_type = "person";
    r.key_roles = rng() % 3 == 0 ? std::vector<std::string>{"name", "birth_place"} : std::vector<std::string>{"name"};
    r.trim = rng() % 4 != 0;
    r.case_fold = rng() % 4 != 0;
    r.collapse_whitespace = rng() % 4 != 0;
    std::vector<MatchRule> rules{r};
    if (rng() % 3 == 0) {
      MatchRule second = r;
      second.key_roles = {"name"};
      rules.push_back(second);
    }
    return rules;
  };

  MatchTrial out;
  out.locals = n;
  auto compare = [&](const std::vector<MatchRule>& rules, const char* stage) {
    std::vector<LocalInstance> ls;
    for (const auto& [_, l] : store.locals()) ls.push_back(l);
    Partition expected = match_partition(ls, store.exceptions(), rules, "person");
    Partition got = partition_of(store, "person");
    ++out.comparisons;
    std::string why;
    if (expected != got || !store.check_partition(&why)) {
      ++out.discrepancies;
      if (out.detail.empty()) {
        out.detail = "seed " + std::to_string(seed) + " " + stage + ": expected " + std::to_string(expected.size()) +
                     " masters, got " + std::to_string(got.size()) + " " + why;
      }
    }
  };

  auto rules = random_rules();
  store.auto_match(rules);
  compare(rules, "first auto-match");

  for (int round = 0; round < 2; ++round) {
    std::vector<std::string> candidates;
    for (const auto& [_, m] : store.masters()) {
      if (m.members.size() >= 2) candidates.push_back(*std::next(m.members.begin(), rng() % m.members.size()));
    }
    std::shuffle(candidates.begin(), candidates.end(), rng);
    std::size_t k = std::min<std::size_t>(candidates.size(), 1 + n / 20);
    for (std::size_t i = 0; i < k; ++i) {
      auto local = store.find_local(candidates[i]);
      if (store.find_master(local->master_id)->members.size() < 2) continue;
      store.unmatch(candidates[i]);
    }
    if (round == 1) rules = random_rules();
    store.auto_match(rules);
    compare(rules, round == 0 ? "after unmatch" : "after unmatch with new rules");
  }
  out.exceptions = store.exceptions().size();
  return out;
}

std::set<std::pair<std::string, std::string>> closure(const std::vector<std::pair<std::string, std::string>>& edges) {
  std::vector<std::string> nodes;
  for (const auto& [a, b] : edges) {
    nodes.push_back(a);
    nodes.push_back(b);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  size_t n = nodes.size();
  auto idx = [&](const std::string& s) {
    return static_cast<size_t>(std::lower_bound(nodes.begin(), nodes.end(), s) - nodes.begin());
  };
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (const auto& [a, b] : edges) reach[idx(a)][idx(b)] = true;
  for (size_t k = 0; k < n; ++k) {
    for (size_t i = 0; i < n; ++i) {
      if (!reach[i][k]) continue;
      for (size_t j = 0; j < n; ++j) {
        if (reach[k][j]) reach[i][j] = true;
      }
    }
  }
  std::set<std::pair<std::string, std::string>> out;
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      if (reach[i][j]) out.insert({nodes[i], nodes[j]});
    }
  }
  return out;
}

namespace {

using Solution = std::map<std::string, std::string>;

const std::string& field(const Quad& q, int pos) {
  return pos == 0 ? q.subject : pos == 1 ? q.predicate : pos == 2 ? q.object : q.graph;
}

bool unify(const TriplePattern& p, const Quad& q, Solution& s) {
  {
    const PatternTerm* terms[4] = {&p.subject, &p.predicate, &p.object, p.graph ? &*p.graph : nullptr};
    for (int pos = 0; pos < 4; ++pos) {
      if (terms[pos] && !terms[pos]->variable && terms[pos]->value != field(q, pos)) return false;
    }
  }
  const PatternTerm* terms[4] = {&p.subject, &p.predicate, &p.object, p.graph ? &*p.graph : nullptr};
  for (int pos = 0; pos < 4; ++pos) {
    if (!terms[pos]) continue;
    const auto& t = *terms[pos];
    const std::string& v = field(q, pos);
    if (!t.variable) {
      if (t.value != v) return false;
      continue;
    }
    auto it = s.find(t.value);
    if (it == s.end()) {
      s[t.value] = v;
    } else if (it->second != v) {
      return false;
    }
  }
  return true;
}

void match_all(const std::vector<Quad>& quads, const std::vector<TriplePattern>& patterns, size_t i,
               const Solution& s, std::vector<Solution>& out) {
  if (i == patterns.size()) {
    out.push_back(s);
    return;
  }
  for (const auto& q : quads) {
    const auto& p = patterns[i];
    if (!p.predicate.variable && p.predicate.value != q.predicate) continue;
    Solution next = s;
    if (unify(patterns[i], q, next)) match_all(quads, patterns, i + 1, next, out);
  }
}

// Lexical form of a literal token, nullopt for IRIs and blank nodes.
std::optional<std::string> lexical(const std::string& token) {
  if (token.empty() || token[0] != '"') return std::nullopt;
  std::string out;
  for (size_t i = 1; i < token.size(); ++i) {
    char c = token[i];
    if (c == '"') return out;
    if (c == '\\' && i + 1 < token.size()) {
      char e = token[++i];
      out.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e == 'r' ? '\r' : e);
      continue;
    }
    out.push_back(c);
  }
  return std::nullopt;
}

bool date_like(const std::string& v) {
  auto d = [&](size_t i) { return i < v.size() && v[i] >= '0' && v[i] <= '9'; };
  bool y = d(0) && d(1) && d(2) && d(3);
  if (v.size() == 4) return y;
  if (v.size() == 7) return y && v[4] == '-' && d(5) && d(6);
  if (v.size() == 10) return y && v[4] == '-' && d(5) && d(6) && v[7] == '-' && d(8) && d(9);
  return false;
}

std::optional<double> number(const std::string& v) {
  if (v.empty()) return std::nullopt;
  double d = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || p != v.data() + v.size()) return std::nullopt;
  return d;
}

bool accepts(const Filter& f, const Solution& s) {
  auto it = s.find(f.variable);
  if (it == s.end()) return false;
  const std::string& tok = it->second;
  if (f.op == Filter::Op::kEq) return tok == f.value;
  if (f.op == Filter::Op::kPrefix) {
    std::string v;
    if (auto lex = lexical(tok)) {
      v = *lex;
    } else if (tok.size() >= 2 && tok.front() == '<') {
      v = tok.substr(1, tok.size() - 2);
    } else if (tok.rfind("_:", 0) == 0) {
      v = tok.substr(2);
    } else {
      return false;
    }
    return v.rfind(f.value, 0) == 0;
  }
  auto lex = lexical(tok);
  if (!lex) return false;
  if (f.kind == Filter::RangeKind::kNumber) {
    auto v = number(*lex);
    if (!v) return false;
    if (f.min && *v < *number(*f.min)) return false;
    if (f.max && *v > *number(*f.max)) return false;
    return true;
  }
  if (!date_like(*lex)) return false;
  if (f.min && lex->substr(0, f.min->size()) < *f.min) return false;
  if (f.max && lex->substr(0, f.max->size()) > *f.max) return false;
  return true;
}

std::vector<std::string> variables_in_order(const Query& q) {
  std::vector<std::string> out;
  auto add = [&](const PatternTerm& t) {
    if (t.variable && std::find(out.begin(), out.end(), t.value) == out.end()) out.push_back(t.value);
  };
  auto add_pattern = [&](const TriplePattern& p) {
    add(p.subject);
    add(p.predicate);
    add(p.object);
    if (p.graph) add(*p.graph);
  };
  for (const auto& p : q.patterns) add_pattern(p);
  for (const auto& g : q.optionals) {
    for (const auto& p : g) add_pattern(p);
  }
  return out;
}

}  // namespace

ResultTable evaluate(const std::vector<Quad>& quads, const Query& q) {
  std::vector<Solution> solutions;
  match_all(quads, q.patterns, 0, {}, solutions);
  for (const auto& group : q.optionals) {
    std::vector<Solution> next;
    for (const auto& s : solutions) {
      std::vector<Solution> ext;
      match_all(quads, group, 0, s, ext);
      if (ext.empty()) {
        next.push_back(s);
      } else {
        next.insert(next.end(), ext.begin(), ext.end());
      }
    }
    solutions = std::move(next);
  }
  std::vector<Solution> kept;
  for (const auto& s : solutions) {
    bool ok = true;
    for (const auto& f : q.filters) ok = ok && accepts(f, s);
    if (ok) kept.push_back(s);
  }

  auto vars = variables_in_order(q);
  ResultTable t;
  if (q.group_by) {
    std::string counted = q.count ? *q.count : q.select.empty() ? vars.front() : q.select.front();
    std::map<std::string, std::set<std::string>> groups;
    std::set<std::string> unknown;
    for (const auto& s : kept) {
      auto c = s.find(counted);
      if (c == s.end()) continue;
      auto k = s.find(*q.group_by);
      if (k == s.end()) {
        unknown.insert(c->second);
      } else {
        groups[k->second].insert(c->second);
      }
    }
    t.grouped = true;
    t.columns = {*q.group_by, "count"};
    for (const auto& [k, members] : groups) {
      t.rows.push_back({k});
      t.counts.push_back(members.size());
    }
    if (!unknown.empty()) {
      t.rows.push_back({std::nullopt});
      t.counts.push_back(unknown.size());
    }
    return t;
  }
  t.columns = q.select.empty() ? vars : q.select;
  for (const auto& s : kept) {
    std::vector<std::optional<std::string>> row;
    for (const auto& c : t.columns) {
      auto it = s.find(c);
      row.push_back(it == s.end() ? std::nullopt : std::optional<std::string>(it->second));
    }
    t.rows.push_back(std::move(row));
  }
  std::sort(t.rows.begin(), t.rows.end());
  if (q.distinct) t.rows.erase(std::unique(t.rows.begin(), t.rows.end()), t.rows.end());
  return t;
}

namespace {

const char* kNs = "http://ex.org/";

std::string node(std::size_t i) { return std::string("<") + kNs + "n" + std::to_string(i) + ">"; }
std::string pred(std::size_t i) { return std::string("<") + kNs + "p" + std::to_string(i) + ">"; }
std::string graph(std::size_t i) { return std::string("<") + kNs + "g" + std::to_string(i) + ">"; }

constexpr std::size_t kPredicates = 8;
constexpr std::size_t kGraphs = 3;

}  // namespace

std::vector<Quad> random_store(std::mt19937& rng, std::size_t n) {
  std::size_t nodes = std::max<std::size_t>(10, n / 4);
  std::vector<Quad> out;
  out.reserve(n);
  const std::vector<std::string> words{"Genova", "Syros", "genoa", "Galaxidi", "Sardinia", "Capitano", "ship"};
  for (std::size_t i = 0; i < n; ++i) {
    Quad q;
    q.subject = node(rng() % nodes);
    std::size_t p = rng() % kPredicates;
    q.predicate = pred(p);
    switch (p % 4) {
      case 0:
      case 1: q.object = node(rng() % nodes); break;
      case 2: q.object = literal_token(std::to_string(static_cast<int>(rng() % 2000)) + (rng() % 3 == 0 ? ".5" : ""),
                                       "http://www.w3.org/2001/XMLSchema#decimal"); break;
      default: {
        int kind = static_cast<int>(rng() % 3);
        if (kind == 0) {
          char buf[16];
          std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", 1800 + static_cast<int>(rng() % 80), 1 + static_cast<int>(rng() % 12),
                        1 + static_cast<int>(rng() % 28));
          q.object = literal_token(buf, "http://www.w3.org/2001/XMLSchema#date");
        } else if (kind == 1) {
          q.object = literal_token(std::to_string(1800 + rng() % 80));
        } else {
          q.object = literal_token(words[rng() % words.size()]);
        }
      }
    }
    q.graph = graph(rng() % kGraphs);
    out.push_back(std::move(q));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Query random_query(std::mt19937& rng) {
  enum class Kind { kNode, kNumber, kLiteral, kOther };
  Query q;
  std::vector<std::pair<std::string, Kind>> vars{{"a", Kind::kNode}};
  auto var = [](const std::string& v) { return PatternTerm{true, v}; };
  auto fresh = [&](Kind k) {
    vars.push_back({std::string(1, static_cast<char>('a' + vars.size())), k});
    return vars.back().first;
  };
  auto existing = [&](Kind k) -> std::optional<std::string> {
    std::vector<std::string> c;
    for (const auto& [v, kind] : vars) {
      if (kind == k) c.push_back(v);
    }
    if (c.empty()) return std::nullopt;
    return c[rng() % c.size()];
  };
  auto make = [&](bool optional_group) {
    TriplePattern p;
    p.subject = var(*existing(Kind::kNode));
    std::size_t pi = rng() % kPredicates;
    bool var_pred = rng() % 8 == 0 && !optional_group && !q.patterns.empty();
    p.predicate = var_pred ? var(fresh(Kind::kOther)) : PatternTerm{false, pred(pi)};
    if (var_pred) {
      p.object = var(fresh(Kind::kOther));
    } else if (pi % 4 < 2) {
      auto old = existing(Kind::kNode);
      if (rng() % 5 == 0) {
        p.object = PatternTerm{false, node(rng() % 10)};
      } else if (rng() % 3 == 0 && old) {
        p.object = var(*old);
      } else {
        p.object = var(fresh(Kind::kNode));
      }
      if (rng() % 3 == 0) std::swap(p.subject, p.object);
    } else {
      p.object = var(fresh(pi % 4 == 2 ? Kind::kNumber : Kind::kLiteral));
    }
    if (rng() % 6 == 0) p.graph = rng() % 2 ? PatternTerm{false, graph(rng() % kGraphs)} : var(fresh(Kind::kOther));
    return p;
  };
  std::size_t n = 1 + rng() % 3;
  for (std::size_t i = 0; i < n; ++i) q.patterns.push_back(make(false));
  if (rng() % 2 == 0) {
    std::vector<TriplePattern> group;
    std::size_t k = 1 + rng() % 2;
    for (std::size_t i = 0; i < k; ++i) group.push_back(make(true));
    q.optionals.push_back(std::move(group));
  }
  auto all = query_variables(q);
  auto kind_of = [&](const std::string& v) {
    for (const auto& [name, k] : vars) {
      if (name == v) return k;
    }
    return Kind::kOther;
  };
  std::size_t nf = rng() % 2 == 0 ? 0 : rng() % 2 + 1;
  for (std::size_t i = 0; i < nf; ++i) {
    Filter f;
    f.variable = all[rng() % all.size()];
    switch (kind_of(f.variable)) {
      case Kind::kNode:
        if (rng() % 4) {
          f.op = Filter::Op::kPrefix;
          f.value = std::string(kNs) + "n" + std::to_string(1 + rng() % 9);
        } else {
          f.op = Filter::Op::kEq;
          f.value = node(rng() % 10);
        }
        break;
      case Kind::kNumber:
        f.op = Filter::Op::kRange;
        f.kind = Filter::RangeKind::kNumber;
        f.min = std::to_string(rng() % 1000);
        if (rng() % 2) f.max = std::to_string(1000 + rng() % 1000) + (rng() % 2 ? ".25" : "");
        break;
      case Kind::kLiteral:
        if (rng() % 3 == 0) {
          f.op = rng() % 2 ? Filter::Op::kPrefix : Filter::Op::kEq;
          f.value = f.op == Filter::Op::kEq ? literal_token("Syros") : "18";
        } else {
          f.op = Filter::Op::kRange;
          f.kind = Filter::RangeKind::kDate;
          f.min = std::to_string(1800 + rng() % 40);
          if (rng() % 2) f.max = std::to_string(1840 + rng() % 40) + (rng() % 2 ? "-06" : "");
        }
        break;
      case Kind::kOther:
        f.op = Filter::Op::kPrefix;
        f.value = kNs;
        break;
    }
    q.filters.push_back(std::move(f));
  }
  if (rng() % 3 == 0) {
    q.group_by = all[rng() % all.size()];
    if (rng() % 2) q.count = all[rng() % all.size()];
    if (rng() % 2) q.select = {all[rng() % all.size()]};
  } else if (rng() % 2 == 0) {
    std::size_t k = 1 + rng() % all.size();
    std::vector<std::string> pick = all;
    std::shuffle(pick.begin(), pick.end(), rng);
    q.select.assign(pick.begin(), pick.begin() + static_cast<long>(k));
    q.distinct = rng() % 2 == 0;
  }
  return q;
}

std::vector<std::pair<std::string, std::string>> random_dag(std::mt19937& rng, int n, bool forest) {
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  auto name = [](int i) { return "n" + std::to_string(i); };
  std::vector<std::pair<std::string, std::string>> edges;
  double density = 1.5 / std::max(1, n);
  std::uniform_real_distribution<double> coin(0, 1);
  for (int a = 0; a < n; ++a) {
    if (forest) {
      if (a + 1 < n && coin(rng) < 0.8) {
        int b = a + 1 + static_cast<int>(rng() % static_cast<unsigned>(n - a - 1));
        edges.emplace_back(name(order[a]), name(order[b]));
      }
      continue;
    }
    for (int b = a + 1; b < n; ++b)
      if (coin(rng) < density * 2) edges.emplace_back(name(order[a]), name(order[b]));
  }
  return edges;
}

std::set<std::string> schema_violations(const std::vector<Quad>& quads, const OntologySchema& ontology,
                                        const Config& config) {
  const std::string type_pred = "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>";
  const std::string onto = "<" + config.ontology_ns;
  auto types_of = [&](const std::string& node) {
    std::set<std::string> out;
    for (const auto& q : quads) {
      if (q.subject == node && q.predicate == type_pred && q.object.rfind(onto, 0) == 0)
        out.insert(q.object.substr(onto.size(), q.object.size() - onto.size() - 1));
    }
    return out;
  };
  auto ancestors = [&](std::string c) {
    std::set<std::string> out;
    while (ontology.classes.count(c) && !out.count(c)) {
      out.insert(c);
      const auto& parent = ontology.classes.at(c).subclass_of;
      if (!parent) break;
      c = *parent;
    }
    return out;
  };
  auto fits = [&](const std::set<std::string>& types, const std::string& wanted) {
    for (const auto& t : types)
      if (ancestors(t).count(wanted)) return true;
    return false;
  };
  std::set<std::string> out;
  for (const auto& q : quads) {
    if (q.predicate.rfind(onto, 0) != 0) continue;
    std::string name = q.predicate.substr(onto.size(), q.predicate.size() - onto.size() - 1);
    auto it = ontology.properties.find(name);
    if (it == ontology.properties.end()) continue;
    const auto& prop = it->second;
    if (!fits(types_of(q.subject), prop.domain)) out.insert("domain " + name + " " + q.line());
    bool literal = q.object[0] == '"';
    if (prop.range.literal != literal || (!literal && !fits(types_of(q.object), prop.range.class_name)))
      out.insert("range " + name + " " + q.line());
  }
  return out;
}

std::set<std::tuple<std::string, std::string, std::string>> duplicate_pairs(const CurationStore& store,
                                                                         const std::vector<MatchRule>& rules) {
  auto locals = store.locals();
  auto exceptions = store.exceptions();
  auto blocked = [&](const std::string& a, const std::string& b) {
    for (const auto& e : exceptions) {
      if ((e.local_id == a && e.peers.count(b)) || (e.local_id == b && e.peers.count(a))) return true;
    }
    return false;
  };
  auto masters = store.masters();
  auto separated = [&](const std::string& ma, const std::string& mb) {
    for (const auto& x : masters.at(ma).members)
      for (const auto& y : masters.at(mb).members)
        if (blocked(x, y)) return true;
    return false;
  };
  auto excluded = [&](const LocalInstance& l, const MatchRule& rule, const std::vector<std::string>& key) {
    for (const auto& e : exceptions)
      if (e.local_id == l.local_id && key_of(e.key_snapshot, rule) == key) return true;
    return false;
  };
  std::set<std::tuple<std::string, std::string, std::string>> out;
  for (const auto& [ia, a] : locals) {
    for (const auto& [ib, b] : locals) {
      if (!(ia < ib) || a.entity_type != b.entity_type || a.master_id == b.master_id) continue;
      for (const auto& rule : rules) {
        if (rule.entity_type != a.entity_type) continue;
        auto ka = key_of(a.attributes, rule);
        auto kb = key_of(b.attributes, rule);
        if (!ka || ka != kb || excluded(a, rule, *ka) || excluded(b, rule, *kb)) continue;
        if (separated(a.master_id, b.master_id)) continue;
        out.insert({a.entity_type, std::min(a.master_id, b.master_id), std::max(a.master_id, b.master_id)});
      }
    }
  }
  return out;
}

}  // namespace archgraph::oracle
