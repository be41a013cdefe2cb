#include "archgraph/ontology.hpp"

#include <cctype>
#include <set>

#include "archgraph/error.hpp"

namespace archgraph {

std::string literal_kind_name(LiteralKind kind) {
  switch (kind) {
    case LiteralKind::kText: return "text";
    case LiteralKind::kInteger: return "integer";
    case LiteralKind::kDecimal: return "decimal";
    case LiteralKind::kDate: return "date";
  }
  return "text";
}

std::optional<LiteralKind> parse_literal_kind(std::string_view name) {
  if (name == "text") return LiteralKind::kText;
  if (name == "integer") return LiteralKind::kInteger;
  if (name == "decimal") return LiteralKind::kDecimal;
  if (name == "date") return LiteralKind::kDate;
  return std::nullopt;
}

std::string literal_datatype(LiteralKind kind) {
  static const std::string xsd = "http://www.w3.org/2001/XMLSchema#";
  switch (kind) {
    case LiteralKind::kText: return xsd + "string";
    case LiteralKind::kInteger: return xsd + "integer";
    case LiteralKind::kDecimal: return xsd + "decimal";
    case LiteralKind::kDate: return xsd + "date";
  }
  return xsd + "string";
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::optional<std::string> make_date(std::string_view y, std::string_view m, std::string_view d) {
  if (y.size() != 4 || !all_digits(y)) return std::nullopt;
  std::string out(y);
  if (m.empty()) return out;
  if (m.size() != 2 || !all_digits(m)) return std::nullopt;
  int month = std::stoi(std::string(m));
  if (month < 1 || month > 12) return std::nullopt;
  out += "-" + std::string(m);
  if (d.empty()) return out;
  if (d.size() != 2 || !all_digits(d)) return std::nullopt;
  static constexpr int kDays[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int day = std::stoi(std::string(d));
  if (day < 1 || day > kDays[month - 1]) return std::nullopt;
  return out + "-" + std::string(d);
}

std::optional<std::string> parse_number(std::string_view raw, char decimal_sep, bool integer) {
  std::string out;
  size_t i = 0;
  if (i < raw.size() && (raw[i] == '-' || raw[i] == '+')) {
    if (raw[i] == '-') out.push_back('-');
    ++i;
  }
  bool digits = false;
  bool seen_sep = false;
  for (; i < raw.size(); ++i) {
    char c = raw[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      out.push_back(c);
      digits = true;
    } else if (c == decimal_sep && !seen_sep && !integer) {
      out.push_back('.');
      seen_sep = true;
    } else {
      return std::nullopt;
    }
  }
  if (!digits || out.back() == '.') return std::nullopt;
  return out;
}

}  // namespace

bool is_known_format(LiteralKind kind, std::string_view format) {
  static const std::set<std::string_view> dates{"YYYY",       "YYYY-MM-DD", "DD-MM-YYYY",
                                                "DD/MM/YYYY", "DD.MM.YYYY", "MM-YYYY"};
  static const std::set<std::string_view> numbers{"plain", "comma-decimal"};
  switch (kind) {
    case LiteralKind::kDate: return dates.contains(format);
    case LiteralKind::kInteger:
    case LiteralKind::kDecimal: return numbers.contains(format);
    case LiteralKind::kText: return format == "verbatim";
  }
  return false;
}

std::optional<std::string> normalize_literal(LiteralKind kind, std::string_view format,
                                             std::string_view raw) {
  switch (kind) {
    case LiteralKind::kText:
      return std::string(raw);
    case LiteralKind::kInteger:
    case LiteralKind::kDecimal: {
      char sep = format == "comma-decimal" ? ',' : '.';
      return parse_number(raw, sep, kind == LiteralKind::kInteger);
    }
    case LiteralKind::kDate: {
      auto field = [&](size_t pos, size_t len) { return raw.substr(pos, len); };
      if (format == "YYYY") {
        if (raw.size() != 4) return std::nullopt;
        return make_date(raw, {}, {});
      }
      if (format == "MM-YYYY") {
        if (raw.size() != 7 || raw[2] != '-') return std::nullopt;
        return make_date(field(3, 4), field(0, 2), {});
      }
      if (format == "YYYY-MM-DD") {
        if (raw.size() != 10 || raw[4] != '-' || raw[7] != '-') return std::nullopt;
        return make_date(field(0, 4), field(5, 2), field(8, 2));
      }
      if (format.size() == 10 && format.substr(0, 2) == "DD") {
        char sep = format[2];
        if (raw.size() != 10 || raw[2] != sep || raw[5] != sep) return std::nullopt;
        return make_date(field(6, 4), field(3, 2), field(0, 2));
      }
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string PropertyRange::to_string() const {
  return literal ? "literal:" + literal_kind_name(kind) : class_name;
}

bool OntologySchema::is_subclass(const std::string& sub, const std::string& super) const {
  std::optional<std::string> cur = sub;
  for (size_t steps = 0; cur && steps <= classes.size(); ++steps) {
    if (*cur == super) return true;
    auto it = classes.find(*cur);
    if (it == classes.end()) return false;
    cur = it->second.subclass_of;
  }
  return false;
}

const OntologyProperty* OntologySchema::property(const std::string& name) const {
  auto it = properties.find(name);
  return it == properties.end() ? nullptr : &it->second;
}

OntologySchema parse_ontology(std::string_view document) {
  Json doc = parse_document(document, "ontology");
  OntologySchema schema;
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kParseError, "ontology: " + msg); };
  try {
    if (doc.contains("format_version") && doc.at("format_version") != 1) {
      fail("unsupported format_version");
    }
    for (const auto& jc : doc.value("classes", Json::array())) {
      OntologyClass c;
      c.name = require_string(jc, "name", "ontology class");
      if (jc.contains("subclass_of")) c.subclass_of = jc.at("subclass_of").get<std::string>();
      if (!schema.classes.emplace(c.name, c).second) fail("duplicate class " + c.name);
    }
    for (const auto& [name, c] : schema.classes) {
      if (c.subclass_of && !schema.classes.contains(*c.subclass_of)) {
        fail("class " + name + " extends undeclared class " + *c.subclass_of);
      }
    }
    for (const auto& [name, c] : schema.classes) {
      std::set<std::string> seen{name};
      std::optional<std::string> cur = c.subclass_of;
      while (cur) {
        if (!seen.insert(*cur).second) {
          throw Error(ErrorCode::kCycleInSubclass, "ontology: subclass cycle through " + name);
        }
        cur = schema.classes.at(*cur).subclass_of;
      }
    }
    for (const auto& jp : doc.value("properties", Json::array())) {
      OntologyProperty p;
      p.name = require_string(jp, "name", "ontology property");
      p.domain = require_string(jp, "domain", "ontology property " + p.name);
      std::string range = require_string(jp, "range", "ontology property " + p.name);
      if (range.rfind("literal:", 0) == 0) {
        auto kind = parse_literal_kind(range.substr(8));
        if (!kind) fail("property " + p.name + ": unknown literal kind in '" + range + "'");
        p.range = PropertyRange{true, *kind, {}};
      } else {
        p.range = PropertyRange{false, LiteralKind::kText, range};
        if (!schema.classes.contains(range)) fail("property " + p.name + ": undeclared range " + range);
      }
      if (!schema.classes.contains(p.domain)) fail("property " + p.name + ": undeclared domain " + p.domain);
      if (!schema.properties.emplace(p.name, p).second) fail("duplicate property " + p.name);
    }
  } catch (const Json::exception& e) {
    fail(e.what());
  }
  return schema;
}

Json ontology_to_json(const OntologySchema& schema) {
  Json classes = Json::array();
  for (const auto& [name, c] : schema.classes) {
    Json jc{{"name", name}};
    if (c.subclass_of) jc["subclass_of"] = *c.subclass_of;
    classes.push_back(jc);
  }
  Json props = Json::array();
  for (const auto& [name, p] : schema.properties) {
    props.push_back({{"name", name}, {"domain", p.domain}, {"range", p.range.to_string()}});
  }
  return Json{{"format_version", 1}, {"classes", classes}, {"properties", props}};
}

}  // namespace archgraph
