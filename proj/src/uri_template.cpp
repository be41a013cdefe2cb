#include "archgraph/uri_template.hpp"

#include <cctype>
#include <cstdio>

#include "archgraph/error.hpp"
#include "archgraph/hashing.hpp"
#include "archgraph/text.hpp"

namespace archgraph {

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  std::vector<UriPart> parse_template() {
    std::vector<UriPart> parts;
    std::string literal;
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '{') {
        if (!literal.empty()) parts.push_back({true, std::move(literal), {}});
        literal.clear();
        ++pos_;
        UriPart part{false, {}, parse_expr()};
        expect('}');
        parts.push_back(std::move(part));
      } else if (c == '}') {
        fail("unbalanced '}'");
      } else {
        if (std::isspace(static_cast<unsigned char>(c))) fail("whitespace in literal segment");
        literal.push_back(c);
        ++pos_;
      }
    }
    if (!literal.empty()) parts.push_back({true, std::move(literal), {}});
    return parts;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::kParseError,
                "uri template '" + std::string(src_) + "' at offset " + std::to_string(pos_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && src_[pos_] == ' ') ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string name() {
    skip_ws();
    size_t start = pos_;
    while (pos_ < src_.size()) {
      auto c = static_cast<unsigned char>(src_[pos_]);
      if (!(std::isalnum(c) || c == '_' || c == '-' || c == '.' || c >= 0x80)) break;
      ++pos_;
    }
    if (start == pos_) fail("expected a name");
    return std::string(src_.substr(start, pos_ - start));
  }

  UriExpr parse_expr() {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '\'') {
      ++pos_;
      size_t start = pos_;
      while (pos_ < src_.size() && src_[pos_] != '\'') ++pos_;
      if (pos_ >= src_.size()) fail("unterminated text");
      UriExpr e{UriExpr::Kind::kText, std::string(src_.substr(start, pos_ - start)), {}};
      ++pos_;
      return e;
    }
    std::string word = name();
    skip_ws();
    if (word == "column") {
      expect(':');
      return {UriExpr::Kind::kColumn, name(), {}};
    }
    if (word == "slug") {
      expect('(');
      UriExpr e{UriExpr::Kind::kSlug, {}, {parse_expr()}};
      expect(')');
      return e;
    }
    if (word == "hash") {
      expect('(');
      UriExpr e{UriExpr::Kind::kHash, {}, {parse_expr()}};
      skip_ws();
      while (pos_ < src_.size() && src_[pos_] == ',') {
        ++pos_;
        e.args.push_back(parse_expr());
        skip_ws();
      }
      expect(')');
      return e;
    }
    if (word == "node") {
      expect('(');
      UriExpr e{UriExpr::Kind::kNode, name(), {}};
      expect(')');
      return e;
    }
    fail("unknown function '" + word + "'");
  }

  std::string_view src_;
  size_t pos_ = 0;
};

void collect_columns(const UriExpr& e, std::set<std::string>& out) {
  if (e.kind == UriExpr::Kind::kColumn) out.insert(e.value);
  for (const auto& a : e.args) collect_columns(a, out);
}

std::string eval(const UriExpr& e, const RowContext& row, const UriEvalOptions& options) {
  switch (e.kind) {
    case UriExpr::Kind::kColumn: return row.column ? row.column(e.value) : std::string();
    case UriExpr::Kind::kText: return e.value;
    case UriExpr::Kind::kSlug: {
      std::string arg = eval(e.args.at(0), row, options);
      std::string s = text::slug(arg);
      if (!s.empty()) return s;
      if (!options.hash_fallback) {
        throw Error(ErrorCode::kEmptySlug, "slug of '" + arg + "' is empty");
      }
      if (options.warnings) {
        options.warnings->push_back("empty slug for '" + arg + "' in " + row.record_id + "/" +
                                    row.table + "/" + std::to_string(row.row) + "; used hash()");
      }
      std::vector<std::string> parts{arg};
      return content_hash(parts);
    }
    case UriExpr::Kind::kHash: {
      std::vector<std::string> parts;
      for (const auto& a : e.args) parts.push_back(eval(a, row, options));
      return content_hash(parts);
    }
    case UriExpr::Kind::kNode: return node_id(row.record_id, row.table, row.row, e.value);
  }
  return {};
}

}  // namespace

UriTemplate UriTemplate::parse(std::string_view source) {
  UriTemplate t;
  t.source_ = std::string(source);
  t.parts_ = Parser(source).parse_template();
  return t;
}

std::set<std::string> UriTemplate::columns() const {
  std::set<std::string> out;
  for (const auto& p : parts_) {
    if (!p.literal) collect_columns(p.expr, out);
  }
  return out;
}

std::string percent_encode_iri(std::string_view raw) {
  std::string out;
  for (char ch : raw) {
    auto c = static_cast<unsigned char>(ch);
    bool unsafe = c <= 0x20 || c == 0x7F || c == '<' || c == '>' || c == '"' || c == '{' ||
                  c == '}' || c == '|' || c == '\\' || c == '^' || c == '`' || c == '%';
    if (unsafe) {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    } else {
      out.push_back(ch);
    }
  }
  return out;
}

std::string evaluate_tail(const UriTemplate& t, const RowContext& row, const UriEvalOptions& options) {
  std::string out;
  for (const auto& p : t.parts()) {
    if (p.literal) {
      out += p.text;
    } else if (p.expr.kind == UriExpr::Kind::kColumn || p.expr.kind == UriExpr::Kind::kText) {
      out += percent_encode_iri(eval(p.expr, row, options));
    } else {
      out += eval(p.expr, row, options);
    }
  }
  return out;
}

std::string uri_template_eval(const UriTemplate& t, const RowContext& row, std::string_view prefix,
                              std::string_view type_segment, const UriEvalOptions& options) {
  return std::string(prefix) + "/" + std::string(type_segment) + "/" + evaluate_tail(t, row, options);
}

std::string node_id(std::string_view record_id, std::string_view table, std::size_t row,
                    std::string_view role) {
  std::string name;
  name.append(record_id).push_back('\x1f');
  name.append(table).push_back('\x1f');
  name.append(std::to_string(row)).push_back('\x1f');
  name.append(role);
  return uuid_v5(name);
}

}  // namespace archgraph
