#include "archgraph/query.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "archgraph/error.hpp"

namespace archgraph {

namespace {

[[noreturn]] void malformed(const std::string& msg) { throw Error(ErrorCode::kMalformedQuery, msg); }

std::string variable_name(const std::string& text, const std::string& where) {
  if (text.size() < 2 || text[0] != '?') malformed(where + ": expected a variable like ?x, got '" + text + "'");
  return text.substr(1);
}

PatternTerm parse_pattern_term(const Json& j, const std::string& where) {
  if (!j.is_string()) malformed(where + ": term must be a string");
  std::string s = j.get<std::string>();
  if (!s.empty() && s[0] == '?') return {true, variable_name(s, where)};
  try {
    return {false, parse_term(s).token()};
  } catch (const Error& e) {
    malformed(where + ": " + e.what());
  }
}

std::string pattern_term_text(const PatternTerm& t) { return t.variable ? "?" + t.value : t.value; }

TriplePattern parse_pattern(const Json& j, const std::string& where) {
  if (!j.is_object()) malformed(where + ": pattern must be an object with s, p, o");
  for (const auto& [k, _] : j.items()) {
    if (k != "s" && k != "p" && k != "o" && k != "g") malformed(where + ": unknown key '" + k + "'");
  }
  for (const char* k : {"s", "p", "o"}) {
    if (!j.contains(k)) malformed(where + ": missing '" + k + "'");
  }
  TriplePattern p;
  p.subject = parse_pattern_term(j["s"], where + ".s");
  p.predicate = parse_pattern_term(j["p"], where + ".p");
  p.object = parse_pattern_term(j["o"], where + ".o");
  if (j.contains("g")) p.graph = parse_pattern_term(j["g"], where + ".g");
  return p;
}

Json pattern_to_json(const TriplePattern& p) {
  Json j = {{"s", pattern_term_text(p.subject)},
            {"p", pattern_term_text(p.predicate)},
            {"o", pattern_term_text(p.object)}};
  if (p.graph) j["g"] = pattern_term_text(*p.graph);
  return j;
}

bool is_iso_date(std::string_view v) {
  auto digits = [&](size_t from, size_t n) {
    for (size_t i = from; i < from + n; ++i) {
      if (i >= v.size() || v[i] < '0' || v[i] > '9') return false;
    }
    return true;
  };
  if (v.size() == 4) return digits(0, 4);
  if (v.size() == 7) return digits(0, 4) && v[4] == '-' && digits(5, 2);
  if (v.size() == 10) return digits(0, 4) && v[4] == '-' && digits(5, 2) && v[7] == '-' && digits(8, 2);
  return false;
}

std::optional<double> parse_number(std::string_view v) {
  double d = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), d);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) return std::nullopt;
  return d;
}

int position_count(const TriplePattern& p) { return p.graph ? 4 : 3; }

const PatternTerm& term_at(const TriplePattern& p, int pos) {
  switch (pos) {
    case 0: return p.subject;
    case 1: return p.predicate;
    case 2: return p.object;
    default: return *p.graph;
  }
}

const std::string& quad_at(const Quad& q, int pos) {
  switch (pos) {
    case 0: return q.subject;
    case 1: return q.predicate;
    case 2: return q.object;
    default: return q.graph;
  }
}

using Binding = std::vector<const std::string*>;

// A pattern compiled against the variable table.
struct CompiledPattern {
  int n = 3;
  int var[4] = {-1, -1, -1, -1};
  const std::string* constant[4] = {nullptr, nullptr, nullptr, nullptr};
};

class Evaluator {
 public:
  Evaluator(const Snapshot& snap, const std::vector<std::string>& variables) : index_(snap.index()) {
    for (size_t i = 0; i < variables.size(); ++i) ids_[variables[i]] = static_cast<int>(i);
  }

  CompiledPattern compile(const TriplePattern& p) const {
    CompiledPattern c;
    c.n = position_count(p);
    for (int pos = 0; pos < c.n; ++pos) {
      const auto& t = term_at(p, pos);
      if (t.variable) c.var[pos] = ids_.at(t.value);
      else c.constant[pos] = &t.value;
    }
    return c;
  }

  // Orders patterns greedily: most bound positions first, then smallest
  // candidate list.
  std::vector<CompiledPattern> plan(const std::vector<TriplePattern>& patterns, std::vector<bool> bound) const {
    std::vector<CompiledPattern> compiled;
    for (const auto& p : patterns) compiled.push_back(compile(p));
    std::vector<CompiledPattern> ordered;
    std::vector<bool> used(compiled.size(), false);
    for (size_t step = 0; step < compiled.size(); ++step) {
      size_t best = compiled.size();
      int best_bound = -1;
      size_t best_size = 0;
      for (size_t i = 0; i < compiled.size(); ++i) {
        if (used[i]) continue;
        const auto& c = compiled[i];
        int nb = 0;
        size_t size = index_.all().size();
        for (int pos = 0; pos < c.n; ++pos) {
          if (c.constant[pos]) {
            ++nb;
            size = std::min(size, index_.lookup(pos, *c.constant[pos]).size());
          } else if (bound[c.var[pos]]) {
            ++nb;
          }
        }
        if (nb > best_bound || (nb == best_bound && size < best_size)) {
          best = i;
          best_bound = nb;
          best_size = size;
        }
      }
      used[best] = true;
      for (int pos = 0; pos < compiled[best].n; ++pos) {
        if (compiled[best].var[pos] >= 0) bound[compiled[best].var[pos]] = true;
      }
      ordered.push_back(compiled[best]);
    }
    return ordered;
  }

  void extend(const std::vector<CompiledPattern>& plan, size_t step, Binding& b,
              std::vector<Binding>& out) const {
    if (step == plan.size()) {
      out.push_back(b);
      return;
    }
    const auto& c = plan[step];
    const std::vector<uint32_t>* candidates = nullptr;
    for (int pos = 0; pos < c.n; ++pos) {
      const std::string* fixed = c.constant[pos] ? c.constant[pos] : b[c.var[pos]];
      if (!fixed) continue;
      const auto& list = index_.lookup(pos, *fixed);
      if (!candidates || list.size() < candidates->size()) candidates = &list;
    }
    auto visit = [&](const Quad& q) {
      int newly[4];
      int n_new = 0;
      bool ok = true;
      for (int pos = 0; pos < c.n && ok; ++pos) {
        const std::string& value = quad_at(q, pos);
        if (c.constant[pos]) {
          ok = *c.constant[pos] == value;
        } else if (b[c.var[pos]]) {
          ok = *b[c.var[pos]] == value;
        } else {
          b[c.var[pos]] = &value;
          newly[n_new++] = c.var[pos];
        }
      }
      if (ok) extend(plan, step + 1, b, out);
      for (int i = 0; i < n_new; ++i) b[newly[i]] = nullptr;
    };
    if (candidates) {
      for (uint32_t i : *candidates) visit(index_.at(i));
    } else {
      for (const Quad* q : index_.all()) visit(*q);
    }
  }

  int id(const std::string& v) const { return ids_.at(v); }

 private:
  const QuadIndex& index_;
  std::map<std::string, int> ids_;
};

std::vector<std::string> pattern_vars(const TriplePattern& p) {
  std::vector<std::string> out;
  for (int pos = 0; pos < position_count(p); ++pos) {
    if (term_at(p, pos).variable) out.push_back(term_at(p, pos).value);
  }
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

}  // namespace

std::string display_term(const std::string& token) {
  try {
    Term t = parse_term(token);
    if (t.kind == Term::Kind::kBlank) return token;
    return t.value;
  } catch (const Error&) {
    return token;
  }
}

std::vector<std::string> query_variables(const Query& q) {
  std::vector<std::string> out;
  auto add = [&](const TriplePattern& p) {
    for (auto& v : pattern_vars(p)) {
      if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
  };
  for (const auto& p : q.patterns) add(p);
  for (const auto& group : q.optionals) {
    for (const auto& p : group) add(p);
  }
  return out;
}

Query parse_query(const Json& doc) {
  if (!doc.is_object()) malformed("query must be an object");
  static const std::set<std::string> keys = {"patterns", "optional", "filters", "select",
                                             "group_by", "count", "distinct"};
  for (const auto& [k, _] : doc.items()) {
    if (!keys.count(k)) malformed("unknown query key '" + k + "'");
  }
  Query q;
  if (!doc.contains("patterns") || !doc["patterns"].is_array() || doc["patterns"].empty()) {
    malformed("'patterns' must be a non-empty array");
  }
  for (size_t i = 0; i < doc["patterns"].size(); ++i) {
    q.patterns.push_back(parse_pattern(doc["patterns"][i], "patterns[" + std::to_string(i) + "]"));
  }
  if (doc.contains("optional")) {
    if (!doc["optional"].is_array()) malformed("'optional' must be an array of pattern arrays");
    for (size_t i = 0; i < doc["optional"].size(); ++i) {
      const auto& group = doc["optional"][i];
      std::string where = "optional[" + std::to_string(i) + "]";
      if (!group.is_array() || group.empty()) malformed(where + " must be a non-empty array");
      std::vector<TriplePattern> ps;
      for (size_t k = 0; k < group.size(); ++k) {
        ps.push_back(parse_pattern(group[k], where + "[" + std::to_string(k) + "]"));
      }
      q.optionals.push_back(std::move(ps));
    }
  }
  if (doc.contains("filters")) {
    if (!doc["filters"].is_array()) malformed("'filters' must be an array");
    for (size_t i = 0; i < doc["filters"].size(); ++i) {
      const auto& fj = doc["filters"][i];
      std::string where = "filters[" + std::to_string(i) + "]";
      if (!fj.is_object() || !fj.contains("var") || !fj["var"].is_string() || !fj.contains("op") ||
          !fj["op"].is_string()) {
        malformed(where + " needs string 'var' and 'op'");
      }
      Filter f;
      f.variable = variable_name(fj["var"].get<std::string>(), where);
      std::string op = fj["op"].get<std::string>();
      auto str = [&](const char* key) -> std::optional<std::string> {
        if (!fj.contains(key)) return std::nullopt;
        if (!fj[key].is_string()) malformed(where + "." + key + " must be a string");
        return fj[key].get<std::string>();
      };
      if (op == "eq") {
        f.op = Filter::Op::kEq;
        auto v = str("value");
        if (!v) malformed(where + ": eq needs 'value'");
        try {
          f.value = parse_term(*v).token();
        } catch (const Error& e) {
          malformed(where + ": " + e.what());
        }
      } else if (op == "prefix") {
        f.op = Filter::Op::kPrefix;
        auto v = str("value");
        if (!v) malformed(where + ": prefix needs 'value'");
        f.value = *v;
      } else if (op == "range") {
        f.op = Filter::Op::kRange;
        auto kind = str("kind");
        if (kind == "number") f.kind = Filter::RangeKind::kNumber;
        else if (kind == "date") f.kind = Filter::RangeKind::kDate;
        else malformed(where + ": range 'kind' must be number or date");
        f.min = str("min");
        f.max = str("max");
        if (!f.min && !f.max) malformed(where + ": range needs 'min' or 'max'");
        for (const auto& bound : {f.min, f.max}) {
          if (!bound) continue;
          if (f.kind == Filter::RangeKind::kNumber && !parse_number(*bound)) {
            malformed(where + ": '" + *bound + "' is not a number");
          }
          if (f.kind == Filter::RangeKind::kDate && !is_iso_date(*bound)) {
            malformed(where + ": '" + *bound + "' is not YYYY, YYYY-MM or YYYY-MM-DD");
          }
        }
      } else {
        malformed(where + ": unknown op '" + op + "'");
      }
      q.filters.push_back(std::move(f));
    }
  }
  if (doc.contains("select")) {
    if (!doc["select"].is_array()) malformed("'select' must be an array");
    for (const auto& v : doc["select"]) {
      if (!v.is_string()) malformed("'select' entries must be strings");
      q.select.push_back(variable_name(v.get<std::string>(), "select"));
    }
  }
  if (doc.contains("group_by")) {
    if (!doc["group_by"].is_string()) malformed("'group_by' must be a string");
    q.group_by = variable_name(doc["group_by"].get<std::string>(), "group_by");
  }
  if (doc.contains("count")) {
    if (!doc["count"].is_string()) malformed("'count' must be a string");
    q.count = variable_name(doc["count"].get<std::string>(), "count");
  }
  if (doc.contains("distinct")) {
    if (!doc["distinct"].is_boolean()) malformed("'distinct' must be a boolean");
    q.distinct = doc["distinct"].get<bool>();
  }

  auto vars = query_variables(q);
  auto known = [&](const std::string& v) { return std::find(vars.begin(), vars.end(), v) != vars.end(); };
  for (const auto& v : q.select) {
    if (!known(v)) malformed("selected variable ?" + v + " occurs in no pattern");
  }
  for (const auto& f : q.filters) {
    if (!known(f.variable)) malformed("filtered variable ?" + f.variable + " occurs in no pattern");
  }
  if (q.group_by && !known(*q.group_by)) malformed("grouped variable ?" + *q.group_by + " occurs in no pattern");
  if (q.count && !known(*q.count)) malformed("counted variable ?" + *q.count + " occurs in no pattern");
  if (q.count && !q.group_by) malformed("'count' requires 'group_by'");
  return q;
}

Json query_to_json(const Query& q) {
  Json j;
  j["patterns"] = Json::array();
  for (const auto& p : q.patterns) j["patterns"].push_back(pattern_to_json(p));
  if (!q.optionals.empty()) {
    j["optional"] = Json::array();
    for (const auto& group : q.optionals) {
      Json g = Json::array();
      for (const auto& p : group) g.push_back(pattern_to_json(p));
      j["optional"].push_back(g);
    }
  }
  if (!q.filters.empty()) {
    j["filters"] = Json::array();
    for (const auto& f : q.filters) {
      Json fj = {{"var", "?" + f.variable}};
      switch (f.op) {
        case Filter::Op::kEq: fj["op"] = "eq"; fj["value"] = f.value; break;
        case Filter::Op::kPrefix: fj["op"] = "prefix"; fj["value"] = f.value; break;
        case Filter::Op::kRange:
          fj["op"] = "range";
          fj["kind"] = f.kind == Filter::RangeKind::kNumber ? "number" : "date";
          if (f.min) fj["min"] = *f.min;
          if (f.max) fj["max"] = *f.max;
          break;
      }
      j["filters"].push_back(fj);
    }
  }
  if (!q.select.empty()) {
    j["select"] = Json::array();
    for (const auto& v : q.select) j["select"].push_back("?" + v);
  }
  if (q.group_by) j["group_by"] = "?" + *q.group_by;
  if (q.count) j["count"] = "?" + *q.count;
  if (q.distinct) j["distinct"] = true;
  return j;
}

bool filter_accepts(const Filter& f, const std::string* token) {
  if (!token) return false;
  switch (f.op) {
    case Filter::Op::kEq: return *token == f.value;
    case Filter::Op::kPrefix: {
      Term t;
      try {
        t = parse_term(*token);
      } catch (const Error&) {
        return false;
      }
      return t.value.compare(0, f.value.size(), f.value) == 0;
    }
    case Filter::Op::kRange: {
      Term t;
      try {
        t = parse_term(*token);
      } catch (const Error&) {
        return false;
      }
      if (t.kind != Term::Kind::kLiteral) return false;
      if (f.kind == Filter::RangeKind::kNumber) {
        auto v = parse_number(t.value);
        if (!v) return false;
        if (f.min && *v < *parse_number(*f.min)) return false;
        if (f.max && *v > *parse_number(*f.max)) return false;
        return true;
      }
      if (!is_iso_date(t.value)) return false;
      if (f.min && t.value.substr(0, f.min->size()) < *f.min) return false;
      if (f.max && t.value.substr(0, f.max->size()) > *f.max) return false;
      return true;
    }
  }
  return false;
}

ResultTable project_rows(const Query& q, const std::vector<std::string>& variables,
                         const std::vector<std::vector<const std::string*>>& solutions) {
  ResultTable table;
  std::vector<size_t> cols;
  const auto& select = q.select.empty() ? variables : q.select;
  for (const auto& v : select) {
    table.columns.push_back(v);
    cols.push_back(static_cast<size_t>(std::find(variables.begin(), variables.end(), v) - variables.begin()));
  }
  for (const auto& s : solutions) {
    std::vector<std::optional<std::string>> row;
    for (size_t c : cols) row.push_back(s[c] ? std::optional<std::string>(*s[c]) : std::nullopt);
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end());
  if (q.distinct) table.rows.erase(std::unique(table.rows.begin(), table.rows.end()), table.rows.end());
  return table;
}

ResultTable group_rows(const Query& q, const std::vector<std::string>& variables,
                       const std::vector<std::vector<const std::string*>>& solutions) {
  auto col = [&](const std::string& v) {
    return static_cast<size_t>(std::find(variables.begin(), variables.end(), v) - variables.begin());
  };
  size_t key_col = col(*q.group_by);
  std::string counted = q.count ? *q.count : q.select.empty() ? variables.front() : q.select.front();
  size_t count_col = col(counted);

  // Bound keys sort bytewise; the Unknown bucket goes last.
  std::map<std::string, std::set<std::string>> bound;
  std::set<std::string> unknown;
  bool any_unknown = false;
  for (const auto& s : solutions) {
    if (!s[count_col]) continue;
    if (s[key_col]) {
      bound[*s[key_col]].insert(*s[count_col]);
    } else {
      any_unknown = true;
      unknown.insert(*s[count_col]);
    }
  }
  ResultTable table;
  table.grouped = true;
  table.columns = {*q.group_by, "count"};
  for (const auto& [key, members] : bound) {
    table.rows.push_back({key});
    table.counts.push_back(members.size());
  }
  if (any_unknown) {
    table.rows.push_back({std::nullopt});
    table.counts.push_back(unknown.size());
  }
  return table;
}

ResultTable run_query(const Snapshot& snapshot, const Query& q) {
  auto variables = query_variables(q);
  Evaluator eval(snapshot, variables);

  std::vector<Binding> solutions;
  {
    Binding b(variables.size(), nullptr);
    auto plan = eval.plan(q.patterns, std::vector<bool>(variables.size(), false));
    eval.extend(plan, 0, b, solutions);
  }
  std::vector<bool> basic_bound(variables.size(), false);
  for (const auto& p : q.patterns) {
    for (const auto& v : pattern_vars(p)) basic_bound[eval.id(v)] = true;
  }
  for (const auto& group : q.optionals) {
    std::vector<Binding> next;
    for (auto& s : solutions) {
      std::vector<bool> bound(variables.size());
      for (size_t i = 0; i < variables.size(); ++i) bound[i] = s[i] != nullptr;
      auto plan = eval.plan(group, bound);
      size_t before = next.size();
      eval.extend(plan, 0, s, next);
      if (next.size() == before) next.push_back(s);
    }
    solutions = std::move(next);
  }
  std::vector<Binding> kept;
  for (auto& s : solutions) {
    bool ok = true;
    for (const auto& f : q.filters) {
      if (!filter_accepts(f, s[eval.id(f.variable)])) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(std::move(s));
  }
  return q.group_by ? group_rows(q, variables, kept) : project_rows(q, variables, kept);
}

Json ResultTable::to_json() const {
  Json j;
  j["columns"] = columns;
  if (grouped) {
    j["groups"] = Json::array();
    size_t total = 0;
    for (size_t i = 0; i < rows.size(); ++i) {
      const auto& key = rows[i][0];
      j["groups"].push_back({{"key", key ? Json(*key) : Json(nullptr)},
                             {"label", key ? display_term(*key) : std::string(kUnknownBucket)},
                             {"count", counts[i]}});
      total += counts[i];
    }
    j["total"] = total;
    return j;
  }
  j["rows"] = Json::array();
  for (const auto& row : rows) {
    Json r = Json::array();
    for (const auto& cell : row) r.push_back(cell ? Json(*cell) : Json(nullptr));
    j["rows"].push_back(r);
  }
  return j;
}

std::string ResultTable::to_csv() const {
  std::string out;
  for (size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + csv_field(columns[c]);
  out += "\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    if (grouped) {
      const auto& key = rows[i][0];
      out += csv_field(key ? display_term(*key) : kUnknownBucket) + "," + std::to_string(counts[i]) + "\n";
      continue;
    }
    for (size_t c = 0; c < rows[i].size(); ++c) {
      if (c) out += ",";
      if (rows[i][c]) out += csv_field(display_term(*rows[i][c]));
    }
    out += "\n";
  }
  return out;
}

std::string ResultTable::to_text() const {
  std::vector<std::vector<std::string>> cells;
  cells.push_back(columns);
  for (size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> r;
    if (grouped) {
      r.push_back(rows[i][0] ? display_term(*rows[i][0]) : kUnknownBucket);
      r.push_back(std::to_string(counts[i]));
    } else {
      for (const auto& cell : rows[i]) r.push_back(cell ? display_term(*cell) : "");
    }
    cells.push_back(std::move(r));
  }
  std::vector<size_t> width(columns.size(), 0);
  for (const auto& r : cells) {
    for (size_t c = 0; c < r.size() && c < width.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  for (const auto& r : cells) {
    std::string line;
    for (size_t c = 0; c < r.size(); ++c) {
      line += r[c];
      if (c + 1 < r.size()) line += std::string(width[c] - r[c].size() + 2, ' ');
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace archgraph
