#include "archgraph/nquads.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>

#include "archgraph/error.hpp"

namespace archgraph {

namespace {

constexpr std::string_view kXsdString = "http://www.w3.org/2001/XMLSchema#string";

void append_utf8(std::string& out, uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class Lexer {
 public:
  Lexer(std::string_view s, size_t line) : s_(s), line_(line) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::kParseError, "line " + std::to_string(line_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\r')) ++pos_;
  }
  bool at_end() {
    skip_ws();
    return pos_ >= s_.size();
  }
  char peek() { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  Term term() {
    skip_ws();
    char c = peek();
    if (c == '<') return Term::iri(iri());
    if (c == '"') return literal();
    if (c == '_' && pos_ + 1 < s_.size() && s_[pos_ + 1] == ':') {
      pos_ += 2;
      size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != ' ' && s_[pos_] != '\t' && s_[pos_] != '.') ++pos_;
      if (start == pos_) fail("empty blank node label");
      return {Term::Kind::kBlank, std::string(s_.substr(start, pos_ - start)), {}, {}};
    }
    fail("expected a term");
  }

  std::string iri() {
    ++pos_;  // <
    size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] != '>') {
      char c = s_[pos_];
      if (c == ' ' || c == '<' || c == '"') fail("invalid character in IRI");
      ++pos_;
    }
    if (pos_ >= s_.size()) fail("unterminated IRI");
    std::string out(s_.substr(start, pos_ - start));
    ++pos_;
    if (out.empty()) fail("empty IRI");
    return out;
  }

  Term literal() {
    ++pos_;  // "
    std::string value;
    while (true) {
      if (pos_ >= s_.size()) fail("unterminated literal");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        value.push_back(c);
        continue;
      }
      if (pos_ >= s_.size()) fail("dangling escape");
      char e = s_[pos_++];
      switch (e) {
        case '"': value.push_back('"'); break;
        case '\\': value.push_back('\\'); break;
        case 'n': value.push_back('\n'); break;
        case 't': value.push_back('\t'); break;
        case 'r': value.push_back('\r'); break;
        case 'b': value.push_back('\b'); break;
        case 'f': value.push_back('\f'); break;
        case '\'': value.push_back('\''); break;
        case 'u':
        case 'U': {
          size_t n = e == 'u' ? 4 : 8;
          if (pos_ + n > s_.size()) fail("short unicode escape");
          uint32_t cp = 0;
          for (size_t i = 0; i < n; ++i) {
            char h = s_[pos_++];
            cp <<= 4;
            if (h >= '0' && h <= '9') cp |= static_cast<uint32_t>(h - '0');
            else if (h >= 'a' && h <= 'f') cp |= static_cast<uint32_t>(h - 'a' + 10);
            else if (h >= 'A' && h <= 'F') cp |= static_cast<uint32_t>(h - 'A' + 10);
            else fail("bad hex digit in unicode escape");
          }
          append_utf8(value, cp);
          break;
        }
        default: fail(std::string("unknown escape \\") + e);
      }
    }
    Term t = Term::literal(std::move(value));
    if (pos_ + 1 < s_.size() && s_[pos_] == '^' && s_[pos_ + 1] == '^') {
      pos_ += 2;
      if (peek() != '<') fail("expected datatype IRI");
      t.datatype = iri();
      if (t.datatype == kXsdString) t.datatype.clear();
    } else if (peek() == '@') {
      ++pos_;
      size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-')) ++pos_;
      t.language = std::string(s_.substr(start, pos_ - start));
      if (t.language.empty()) fail("empty language tag");
    }
    return t;
  }

  void expect_dot() {
    skip_ws();
    if (peek() != '.') fail("expected '.'");
    ++pos_;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] != '#') fail("trailing content after '.'");
  }

 private:
  std::string_view s_;
  size_t line_;
  size_t pos_ = 0;
};

}  // namespace

std::string escape_literal(std::string_view value) {
  std::string out;
  out.reserve(value.size() + 2);
  for (char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string iri_token(std::string_view iri) {
  std::string out;
  out.reserve(iri.size() + 2);
  out.push_back('<');
  out.append(iri);
  out.push_back('>');
  return out;
}

std::string literal_token(std::string_view value, std::string_view datatype) {
  std::string out = "\"" + escape_literal(value) + "\"";
  if (!datatype.empty() && datatype != kXsdString) out += "^^" + iri_token(datatype);
  return out;
}

std::string Term::token() const {
  switch (kind) {
    case Kind::kIri: return iri_token(value);
    case Kind::kBlank: return "_:" + value;
    case Kind::kLiteral:
      if (!language.empty()) return "\"" + escape_literal(value) + "\"@" + language;
      return literal_token(value, datatype);
  }
  return {};
}

Term parse_term(std::string_view token) {
  Lexer lex(token, 1);
  Term t = lex.term();
  if (!lex.at_end()) lex.fail("trailing content after term");
  return t;
}

std::string Quad::line() const {
  std::string out;
  out.reserve(subject.size() + predicate.size() + object.size() + graph.size() + 6);
  out.append(subject).push_back(' ');
  out.append(predicate).push_back(' ');
  out.append(object).push_back(' ');
  out.append(graph).append(" .");
  return out;
}

Quad make_quad(std::string_view subject_iri, std::string_view predicate_iri, const Term& object,
               std::string_view graph_iri) {
  return {iri_token(subject_iri), iri_token(predicate_iri), object.token(), iri_token(graph_iri)};
}

std::vector<Quad> parse_nquads(std::string_view text) {
  std::vector<Quad> out;
  size_t line_no = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    Lexer lex(line, line_no);
    if (lex.at_end() || lex.peek() == '#') {
      if (end == text.size()) break;
      continue;
    }
    Term s = lex.term();
    if (s.kind == Term::Kind::kLiteral) lex.fail("literal in subject position");
    Term p = lex.term();
    if (p.kind != Term::Kind::kIri) lex.fail("predicate must be an IRI");
    Term o = lex.term();
    lex.skip_ws();
    if (lex.peek() == '.') lex.fail("missing graph term");
    Term g = lex.term();
    if (g.kind == Term::Kind::kLiteral) lex.fail("literal in graph position");
    lex.expect_dot();
    out.push_back({s.token(), p.token(), o.token(), g.token()});
    if (end == text.size()) break;
  }
  return out;
}

std::string serialize_nquads(std::vector<Quad> quads) {
  std::vector<std::string> lines;
  lines.reserve(quads.size());
  for (const auto& q : quads) lines.push_back(q.line());
  std::sort(lines.begin(), lines.end());
  lines.erase(std::unique(lines.begin(), lines.end()), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out.push_back('\n');
  }
  return out;
}

}  // namespace archgraph
