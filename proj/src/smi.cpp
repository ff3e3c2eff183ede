#include "snmpkit/smi.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace snmp::mib {

LexError::LexError(const std::string& message, int line, int column)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

SmiParseError::SmiParseError(const std::string& message, int line, int column,
                             std::vector<std::string> expected)
    : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message +
            (expected.empty() ? std::string() : " (expected " + join(expected, ", ") + ")")),
      line_(line),
      column_(column),
      expected_(std::move(expected)) {}

// ---------------------------------------------------------------------------
// Lexer

namespace {

const std::unordered_set<std::string_view>& keywords() {
  static const std::unordered_set<std::string_view> set = {
      "DEFINITIONS", "BEGIN", "END", "IMPORTS", "FROM", "EXPORTS", "OBJECT", "IDENTIFIER",
      "OBJECT-TYPE", "OBJECT-IDENTITY", "MODULE-IDENTITY", "NOTIFICATION-TYPE", "TRAP-TYPE",
      "TEXTUAL-CONVENTION", "OBJECT-GROUP", "NOTIFICATION-GROUP", "MODULE-COMPLIANCE",
      "AGENT-CAPABILITIES", "SYNTAX", "MAX-ACCESS", "ACCESS", "MIN-ACCESS", "STATUS",
      "DESCRIPTION", "REFERENCE", "INDEX", "AUGMENTS", "DEFVAL", "UNITS", "SEQUENCE", "OF",
      "INTEGER", "OCTET", "STRING", "SIZE", "MACRO", "CHOICE", "IMPLICIT", "APPLICATION",
      "UNIVERSAL", "PRIVATE", "LAST-UPDATED", "ORGANIZATION", "CONTACT-INFO", "REVISION",
      "DISPLAY-HINT", "OBJECTS", "NOTIFICATIONS", "ENTERPRISE", "VARIABLES", "GROUP",
      "MANDATORY-GROUPS", "MODULE", "WRITE-SYNTAX", "PRODUCT-RELEASE", "SUPPORTS", "INCLUDES",
      "VARIATION", "CREATION-REQUIRES", "BITS", "IMPLIED", "TYPE", "NOTATION", "VALUE"};
  return set;
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
}

}  // namespace

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n = 1) {
    for (std::size_t k = 0; k < n && i < src.size(); ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  auto at = [&](std::size_t k) -> char { return i + k < src.size() ? src[i + k] : '\0'; };

  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      continue;
    }
    if (c == '-' && at(1) == '-') {
      advance(2);
      while (i < src.size() && src[i] != '\n') {
        if (src[i] == '-' && at(1) == '-') {
          advance(2);
          break;
        }
        advance();
      }
      continue;
    }
    const int tl = line;
    const int tc = col;
    if (c == '"') {
      advance();
      std::string text;
      bool closed = false;
      while (i < src.size()) {
        if (src[i] == '"') {
          if (at(1) == '"') {
            text.push_back('"');
            advance(2);
            continue;
          }
          advance();
          closed = true;
          break;
        }
        text.push_back(src[i]);
        advance();
      }
      if (!closed) throw LexError("unterminated string", tl, tc);
      out.push_back({TokenKind::string, std::move(text), tl, tc});
      continue;
    }
    if (c == '\'') {
      // 'hex'H or 'bits'B literal
      std::size_t j = i + 1;
      while (j < src.size() && src[j] != '\'' && src[j] != '\n') ++j;
      if (j >= src.size() || src[j] != '\'') throw LexError("unterminated quoted literal", tl, tc);
      std::size_t end = j + 1;
      if (end < src.size() && (src[end] == 'H' || src[end] == 'h' || src[end] == 'B' || src[end] == 'b'))
        ++end;
      std::string text(src.substr(i, end - i));
      advance(end - i);
      out.push_back({TokenKind::string, std::move(text), tl, tc});
      continue;
    }
    if (c == ':' && at(1) == ':' && at(2) == '=') {
      advance(3);
      out.push_back({TokenKind::assign, "::=", tl, tc});
      continue;
    }
    if (c == '.' && at(1) == '.') {
      std::size_t n = at(2) == '.' ? 3 : 2;
      out.push_back({TokenKind::range, std::string(src.substr(i, n)), tl, tc});
      advance(n);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(at(1))))) {
      std::size_t j = i + 1;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      std::string text(src.substr(i, j - i));
      advance(j - i);
      out.push_back({TokenKind::number, std::move(text), tl, tc});
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t j = i + 1;
      while (j < src.size() && is_ident_char(src[j])) {
        if (src[j] == '-' && j + 1 < src.size() && src[j + 1] == '-') break;
        ++j;
      }
      while (j > i + 1 && src[j - 1] == '-') --j;
      std::string text(src.substr(i, j - i));
      advance(j - i);
      TokenKind kind = keywords().contains(text) ? TokenKind::keyword : TokenKind::name;
      out.push_back({kind, std::move(text), tl, tc});
      continue;
    }
    static constexpr std::string_view kPunct = "{}(),;|[].<>:=-@!*&^+";
    if (kPunct.find(c) != std::string_view::npos) {
      out.push_back({TokenKind::punctuation, std::string(1, c), tl, tc});
      advance();
      continue;
    }
    throw LexError("unexpected character '" + std::string(1, c) + "'", tl, tc);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

std::string normalize_ws(std::string_view text) {
  std::string out;
  bool pending = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending = !out.empty();
    } else {
      if (pending) out.push_back(' ');
      pending = false;
      out.push_back(c);
    }
  }
  return out;
}

std::optional<std::uint32_t> parse_arc(std::string_view text) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size()) return std::nullopt;
  return v;
}

const std::set<std::string_view>& clause_keywords() {
  static const std::set<std::string_view> set = {
      "SYNTAX", "MAX-ACCESS", "ACCESS", "MIN-ACCESS", "STATUS", "DESCRIPTION", "REFERENCE",
      "INDEX", "AUGMENTS", "DEFVAL", "UNITS", "LAST-UPDATED", "ORGANIZATION", "CONTACT-INFO",
      "REVISION", "DISPLAY-HINT", "OBJECTS", "NOTIFICATIONS", "ENTERPRISE", "VARIABLES",
      "WRITE-SYNTAX", "GROUP", "MANDATORY-GROUPS", "MODULE", "OBJECT"};
  return set;
}

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : t_(tokens) {}

  CompiledMibModule run() {
    CompiledMibModule m;
    const Token& name = expect_kind(TokenKind::name, "module name");
    m.header.name = name.text;
    module_ = name.text;
    expect_text("DEFINITIONS");
    expect_text("::=");
    expect_text("BEGIN");
    while (true) {
      if (eof()) fail("unexpected end of input", {"END"});
      if (peek_is("END")) {
        ++p_;
        break;
      }
      if (peek_is("IMPORTS")) {
        ++p_;
        parse_imports(m.header);
        continue;
      }
      if (peek_is("EXPORTS")) {
        while (!eof() && !peek_is(";")) ++p_;
        expect_text(";");
        continue;
      }
      parse_assignment();
    }
    if (!eof()) fail("trailing tokens after END", {"end of input"});

    order_oids(m);
    for (auto& row : rows_) m.records.emplace_back(std::move(row));
    m.warnings = std::move(warnings_);
    return m;
  }

 private:
  // -- token helpers -------------------------------------------------------

  bool eof() const { return p_ >= t_.size(); }
  const Token& peek(std::size_t k = 0) const {
    static const Token kEnd{TokenKind::punctuation, "", 0, 0};
    return p_ + k < t_.size() ? t_[p_ + k] : kEnd;
  }
  bool peek_is(std::string_view text, std::size_t k = 0) const {
    return p_ + k < t_.size() && t_[p_ + k].text == text && t_[p_ + k].kind != TokenKind::string;
  }

  [[noreturn]] void fail(const std::string& message, std::vector<std::string> expected) const {
    std::string msg = message;
    if (!eof()) {
      const Token& at = peek();
      throw SmiParseError(msg + " at '" + at.text + "'", at.line, at.column, std::move(expected));
    }
    int line = t_.empty() ? 1 : t_.back().line;
    int column = t_.empty() ? 1 : t_.back().column + static_cast<int>(t_.back().text.size());
    throw SmiParseError(msg + " at end of input", line, column, std::move(expected));
  }

  const Token& expect_text(std::string_view text) {
    if (!peek_is(text)) fail("unexpected token", {std::string(text)});
    return t_[p_++];
  }

  const Token& expect_kind(TokenKind kind, const std::string& what) {
    if (eof() || peek().kind != kind) fail("unexpected token", {what});
    return t_[p_++];
  }

  const Token& expect_identifier(const std::string& what) {
    if (eof() || (peek().kind != TokenKind::name && peek().kind != TokenKind::keyword))
      fail("unexpected token", {what});
    return t_[p_++];
  }

  void warn(const Token& at, std::string message) {
    warnings_.push_back({at.line, at.column, std::move(message)});
  }

  /// Skips a balanced group starting at the current "{" / "(" / "[".
  void skip_group() {
    const std::string open = peek().text;
    const std::string close = open == "{" ? "}" : open == "(" ? ")" : "]";
    ++p_;
    int depth = 1;
    while (depth > 0) {
      if (eof()) fail("unbalanced '" + open + "'", {close});
      const Token& tok = t_[p_++];
      if (tok.kind != TokenKind::punctuation) continue;
      if (tok.text == open) ++depth;
      if (tok.text == close) --depth;
    }
  }

  bool at_group_open() const {
    return !eof() && peek().kind == TokenKind::punctuation &&
           (peek().text == "{" || peek().text == "(" || peek().text == "[");
  }

  // -- top level -----------------------------------------------------------

  void parse_imports(ModuleHeader& header) {
    std::vector<std::string> pending;
    while (true) {
      if (eof()) fail("unterminated IMPORTS", {";"});
      if (peek_is(";")) {
        ++p_;
        if (!pending.empty()) fail("imported symbols without FROM", {"FROM"});
        return;
      }
      if (peek_is(",")) {
        ++p_;
        continue;
      }
      if (peek_is("FROM")) {
        ++p_;
        const Token& mod = expect_kind(TokenKind::name, "module name");
        for (auto& sym : pending) header.imports.push_back({sym, mod.text});
        pending.clear();
        continue;
      }
      const Token& sym = expect_identifier("symbol");
      pending.push_back(sym.text);
    }
  }

  void parse_assignment() {
    const Token& head = peek();
    if (head.kind == TokenKind::keyword && peek_is("MACRO", 1)) {
      // Macro definitions in SNMPv2-SMI: skip to the matching END.
      p_ += 2;
      expect_text("::=");
      expect_text("BEGIN");
      while (!eof() && !peek_is("END")) ++p_;
      expect_text("END");
      return;
    }
    if (head.kind != TokenKind::name) fail("unexpected token", {"identifier", "END"});
    ++p_;
    const std::string name = head.text;

    if (peek_is("MACRO")) {
      ++p_;
      expect_text("::=");
      expect_text("BEGIN");
      while (!eof() && !peek_is("END")) ++p_;
      expect_text("END");
      return;
    }
    if (peek_is("::=")) {
      ++p_;
      parse_type_assignment(head);
      return;
    }
    if (peek_is("OBJECT") && peek_is("IDENTIFIER", 1)) {
      p_ += 2;
      expect_text("::=");
      parse_oid_value(head, NodeKind::plain, {});
      return;
    }
    if (peek_is("OBJECT-TYPE")) {
      ++p_;
      Clauses c = parse_clauses(true);
      expect_text("::=");
      parse_oid_value(head, NodeKind::object_type, c);
      return;
    }
    if (peek_is("MODULE-IDENTITY")) {
      ++p_;
      Clauses c = parse_clauses(true);
      expect_text("::=");
      parse_oid_value(head, NodeKind::module_identity, c);
      return;
    }
    if (peek_is("OBJECT-IDENTITY") || peek_is("NOTIFICATION-TYPE")) {
      ++p_;
      Clauses c = parse_clauses(true);
      c.syntax.reset();
      c.access.reset();
      expect_text("::=");
      parse_oid_value(head, NodeKind::other, c);
      return;
    }
    if (peek_is("TRAP-TYPE")) {
      const Token& at = t_[p_++];
      skip_to_assign();
      expect_text("::=");
      expect_kind(TokenKind::number, "trap number");
      warn(at, "TRAP-TYPE " + name + " skipped");
      return;
    }
    if (peek().kind == TokenKind::keyword && peek().text.find('-') != std::string::npos) {
      // Other SMI macros (OBJECT-GROUP, MODULE-COMPLIANCE, AGENT-CAPABILITIES...).
      ++p_;
      skip_to_assign();
      expect_text("::=");
      if (peek_is("{")) {
        parse_oid_value(head, NodeKind::other, {});
      } else {
        warn(head, "value of " + name + " is not an OID; skipped");
        skip_value();
      }
      return;
    }
    if (peek().kind == TokenKind::name && !peek_is("::=", 1)) {
      // Unknown macro invocation.
      const Token& macro = t_[p_++];
      skip_to_assign();
      expect_text("::=");
      if (peek_is("{")) {
        parse_oid_value(head, NodeKind::other, {});
      } else {
        warn(macro, "unknown construct " + macro.text + " for " + name + " skipped");
        skip_value();
      }
      return;
    }
    // Value assignment of some other type, e.g. "x INTEGER ::= 5".
    warn(head, "assignment of " + name + " skipped");
    skip_to_assign();
    expect_text("::=");
    skip_value();
  }

  void skip_to_assign() {
    while (!eof() && !peek_is("::=")) {
      if (at_group_open())
        skip_group();
      else
        ++p_;
    }
  }

  void skip_value() {
    if (eof()) fail("unexpected end of input", {"value"});
    if (at_group_open())
      skip_group();
    else
      ++p_;
  }

  // Name ::= <type>
  void parse_type_assignment(const Token& head) {
    if (peek_is("SEQUENCE") && peek_is("{", 1)) {
      ++p_;
      parse_row_schema(head.text);
      return;
    }
    if (peek_is("TEXTUAL-CONVENTION")) {
      ++p_;
      parse_clauses(false);
      return;
    }
    if (peek_is("CHOICE")) {
      ++p_;
      if (!peek_is("{")) fail("unexpected token", {"{"});
      skip_group();
      return;
    }
    parse_type();
  }

  /// Parses a type reference and returns its base name. Constraints,
  /// enumerations and tags are dropped.
  std::string parse_type() {
    std::vector<std::string> words;
    if (peek_is("[")) {
      skip_group();
      if (peek_is("IMPLICIT")) ++p_;
    }
    if (peek_is("SEQUENCE") && peek_is("OF", 1)) {
      p_ += 2;
      words = {"SEQUENCE", "OF"};
      words.push_back(expect_identifier("type name").text);
    } else if (peek_is("OCTET")) {
      ++p_;
      expect_text("STRING");
      words = {"OCTET", "STRING"};
    } else if (peek_is("OBJECT")) {
      ++p_;
      expect_text("IDENTIFIER");
      words = {"OBJECT", "IDENTIFIER"};
    } else {
      words.push_back(expect_identifier("type").text);
    }
    while (peek_is("{") || peek_is("(")) skip_group();
    return join(words, " ");
  }

  void parse_row_schema(const std::string& type_name) {
    RowSchema row{module_, type_name, {}};
    expect_text("{");
    while (true) {
      const Token& col = expect_identifier("column name");
      std::string syntax = parse_type();
      row.columns.push_back({col.text, syntax});
      if (peek_is(",")) {
        ++p_;
        continue;
      }
      expect_text("}");
      break;
    }
    rows_.push_back(std::move(row));
  }

  struct Clauses {
    std::optional<std::string> syntax;
    std::optional<std::string> access;
    std::optional<std::string> status;
    std::optional<std::string> description;
  };

  /// Reads macro clauses up to (not including) "::=". With `until_assign`
  /// false (TEXTUAL-CONVENTION) parsing stops after the SYNTAX type.
  Clauses parse_clauses(bool until_assign) {
    Clauses c;
    while (true) {
      if (eof()) fail("unexpected end of input", {"::="});
      if (until_assign && peek_is("::=")) return c;
      const Token& kw = t_[p_];
      if (kw.kind != TokenKind::keyword || !clause_keywords().contains(kw.text)) {
        if (!until_assign) return c;
        fail("unexpected token", {"clause keyword", "::="});
      }
      ++p_;
      const std::string& k = kw.text;
      if (k == "SYNTAX" || k == "WRITE-SYNTAX") {
        std::string s = parse_type();
        if (k == "SYNTAX") c.syntax = s;
        if (!until_assign) return c;
      } else if (k == "MAX-ACCESS" || k == "ACCESS" || k == "MIN-ACCESS") {
        const Token& v = expect_kind(TokenKind::name, "access value");
        if (k != "MIN-ACCESS") c.access = v.text;
      } else if (k == "STATUS") {
        c.status = expect_kind(TokenKind::name, "status value").text;
      } else if (k == "DESCRIPTION") {
        std::string text = normalize_ws(expect_kind(TokenKind::string, "string").text);
        if (!c.description) c.description = std::move(text);
      } else if (k == "INDEX" || k == "AUGMENTS" || k == "DEFVAL" || k == "OBJECTS" ||
                 k == "NOTIFICATIONS" || k == "VARIABLES" || k == "MANDATORY-GROUPS") {
        if (!peek_is("{")) fail("unexpected token", {"{"});
        skip_group();
      } else if (k == "MODULE") {
        // MODULE-COMPLIANCE: optional module name follows.
        if (!eof() && peek().kind == TokenKind::name &&
            !clause_keywords().contains(peek(1).text))
          ++p_;
      } else if (k == "GROUP" || k == "OBJECT" || k == "ENTERPRISE") {
        expect_identifier("name");
      } else {
        // UNITS, REFERENCE, LAST-UPDATED, ORGANIZATION, CONTACT-INFO, REVISION, DISPLAY-HINT
        expect_kind(TokenKind::string, "string");
      }
    }
  }

  // ::= { parent a b ... n }
  void parse_oid_value(const Token& head, NodeKind kind, const Clauses& c) {
    const Token& open = expect_text("{");
    struct Elem {
      std::optional<std::string> name;
      std::optional<std::uint32_t> number;
      const Token* at;
    };
    std::vector<Elem> elems;
    while (!peek_is("}")) {
      if (eof()) fail("unexpected end of input", {"}"});
      const Token& tok = t_[p_];
      if (tok.kind == TokenKind::number) {
        ++p_;
        auto arc = parse_arc(tok.text);
        if (!arc) fail("arc out of range", {"unsigned 32-bit number"});
        elems.push_back({std::nullopt, arc, &tok});
      } else if (tok.kind == TokenKind::name) {
        ++p_;
        Elem e{tok.text, std::nullopt, &tok};
        if (peek_is("(")) {
          ++p_;
          const Token& num = expect_kind(TokenKind::number, "number");
          auto arc = parse_arc(num.text);
          if (!arc) fail("arc out of range", {"unsigned 32-bit number"});
          e.number = arc;
          expect_text(")");
        }
        elems.push_back(e);
      } else {
        fail("unexpected token", {"name", "number", "}"});
      }
    }
    expect_text("}");
    if (elems.size() < 2) {
      throw SmiParseError("OID value needs a parent and an arc", open.line, open.column,
                          {"name", "number"});
    }
    if (!elems.back().number) {
      const Token& at = *elems.back().at;
      throw SmiParseError("last OID component must be a number", at.line, at.column, {"number"});
    }

    std::string parent;
    const Elem& first = elems.front();
    if (first.name && !first.number) {
      parent = *first.name;
    } else if (first.name) {
      // { iso(1) ... } names an arc under the root.
      add_oid(OidAssignment{module_, *first.name, "zero", *first.number, NodeKind::plain, {}, {}, {}, {}});
      parent = *first.name;
    } else {
      // A leading 0 is the root itself.
      parent = *first.number == 0 ? "zero" : "zero." + std::to_string(*first.number);
    }
    for (std::size_t i = 1; i + 1 < elems.size(); ++i) {
      const Elem& e = elems[i];
      if (!e.number) {
        const Token& at = *e.at;
        throw SmiParseError("intermediate OID component needs a number", at.line, at.column,
                            {"number", "name(number)"});
      }
      if (e.name) {
        add_oid(OidAssignment{module_, *e.name, parent, *e.number, NodeKind::plain, {}, {}, {}, {}});
        parent = *e.name;
      } else {
        parent += "." + std::to_string(*e.number);
      }
    }

    OidAssignment a;
    a.module = module_;
    a.name = head.text;
    a.parent = parent;
    a.arc = *elems.back().number;
    a.kind = kind;
    a.syntax = c.syntax;
    a.max_access = c.access;
    a.status = c.status;
    a.description = c.description;
    add_oid(std::move(a));
  }

  void add_oid(OidAssignment a) { oids_.push_back(std::move(a)); }

  static std::string parent_head(const std::string& parent) {
    return parent.substr(0, parent.find('.'));
  }

  // Stable topological order: a record follows the record defining its parent.
  void order_oids(CompiledMibModule& m) {
    std::map<std::string, std::size_t> first_def;
    for (std::size_t i = 0; i < oids_.size(); ++i) first_def.try_emplace(oids_[i].name, i);
    std::vector<int> state(oids_.size(), 0);  // 0 new, 1 visiting, 2 done
    std::vector<std::size_t> order;
    order.reserve(oids_.size());
    std::function<void(std::size_t)> visit = [&](std::size_t i) {
      if (state[i] == 2) return;
      if (state[i] == 1) {
        throw SmiParseError("cyclic OID definition involving " + oids_[i].name, 0, 0, {});
      }
      state[i] = 1;
      auto it = first_def.find(parent_head(oids_[i].parent));
      if (it != first_def.end() && it->second != i) visit(it->second);
      state[i] = 2;
      order.push_back(i);
    };
    for (std::size_t i = 0; i < oids_.size(); ++i) visit(i);
    for (std::size_t i : order) m.records.emplace_back(std::move(oids_[i]));
  }

  const std::vector<Token>& t_;
  std::size_t p_ = 0;
  std::string module_;
  std::vector<OidAssignment> oids_;
  std::vector<RowSchema> rows_;
  std::vector<Diagnostic> warnings_;
};

}  // namespace

CompiledMibModule parse_module(const std::vector<Token>& tokens) { return Parser(tokens).run(); }

// ---------------------------------------------------------------------------
// Compiled file format

namespace {

std::string escape_field(const std::optional<std::string>& value) {
  if (!value) return "-";
  if (*value == "-") return "\\-";
  std::string out;
  for (char c : *value) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::optional<std::string> unescape_field(std::string_view text, int line) {
  if (text == "-") return std::nullopt;
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out.push_back(text[i]);
      continue;
    }
    if (++i >= text.size()) throw LoadError("line " + std::to_string(line) + ": dangling escape");
    switch (text[i]) {
      case '\\': out.push_back('\\'); break;
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      case '-': out.push_back('-'); break;
      default:
        throw LoadError("line " + std::to_string(line) + ": unknown escape \\" + text[i]);
    }
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace

void emit(const CompiledMibModule& module, std::ostream& sink) {
  sink << "CMIB 1\n";
  sink << "MODULE " << module.header.name << '\n';
  for (const auto& imp : module.header.imports) sink << "IMP\t" << imp.symbol << '\t' << imp.module << '\n';
  for (const auto& rec : module.records) {
    if (const auto* a = std::get_if<OidAssignment>(&rec)) {
      sink << "OID\t" << a->name << '\t' << a->parent << '\t' << a->arc << '\t' << to_string(a->kind)
           << '\t' << escape_field(a->syntax) << '\t' << escape_field(a->max_access) << '\t'
           << escape_field(a->status) << '\t' << escape_field(a->description) << '\n';
    } else {
      const auto& row = std::get<RowSchema>(rec);
      sink << "ROWBEGIN\t" << row.type_name << '\n';
      for (const auto& col : row.columns) sink << "COL\t" << col.name << '\t' << col.syntax << '\n';
      sink << "ROWEND\n";
    }
  }
  sink.flush();
  if (!sink) throw Error("failed to write compiled MIB");
}

std::string emit_to_string(const CompiledMibModule& module) {
  std::ostringstream out;
  emit(module, out);
  return out.str();
}

CompiledMibModule read_compiled(std::istream& source) {
  CompiledMibModule m;
  std::string line;
  int n = 0;
  auto bad = [&](const std::string& why) {
    return LoadError("line " + std::to_string(n) + ": " + why);
  };

  if (!std::getline(source, line)) throw LoadError("empty compiled MIB file");
  ++n;
  if (line.rfind("CMIB ", 0) != 0) throw bad("not a compiled MIB file");
  if (line != "CMIB 1") throw bad("unsupported format version '" + line.substr(5) + "'");
  if (!std::getline(source, line)) throw LoadError("missing MODULE line");
  ++n;
  if (line.rfind("MODULE ", 0) != 0 || line.size() <= 7) throw bad("expected MODULE <name>");
  m.header.name = line.substr(7);

  std::optional<RowSchema> row;
  while (std::getline(source, line)) {
    ++n;
    if (line.empty()) continue;
    auto f = split_tabs(line);
    const auto tag = f[0];
    if (row && tag != "COL" && tag != "ROWEND") throw bad("unterminated ROWBEGIN");
    if (tag == "IMP") {
      if (f.size() != 3) throw bad("IMP needs 2 fields");
      m.header.imports.push_back({std::string(f[1]), std::string(f[2])});
    } else if (tag == "OID") {
      if (f.size() != 9) throw bad("OID needs 8 fields");
      OidAssignment a;
      a.module = m.header.name;
      a.name = f[1];
      a.parent = f[2];
      auto arc = parse_arc(f[3]);
      if (!arc) throw bad("invalid arc '" + std::string(f[3]) + "'");
      a.arc = *arc;
      auto kind = parse_node_kind(f[4]);
      if (!kind) throw bad("invalid node kind '" + std::string(f[4]) + "'");
      a.kind = *kind;
      a.syntax = unescape_field(f[5], n);
      a.max_access = unescape_field(f[6], n);
      a.status = unescape_field(f[7], n);
      a.description = unescape_field(f[8], n);
      m.records.emplace_back(std::move(a));
    } else if (tag == "ROWBEGIN") {
      if (f.size() != 2) throw bad("ROWBEGIN needs 1 field");
      row = RowSchema{m.header.name, std::string(f[1]), {}};
    } else if (tag == "COL") {
      if (!row) throw bad("COL outside ROWBEGIN");
      if (f.size() != 3) throw bad("COL needs 2 fields");
      row->columns.push_back({std::string(f[1]), std::string(f[2])});
    } else if (tag == "ROWEND") {
      if (!row) throw bad("ROWEND without ROWBEGIN");
      m.records.emplace_back(std::move(*row));
      row.reset();
    } else {
      throw bad("unknown record kind '" + std::string(tag) + "'");
    }
  }
  if (row) throw bad("unterminated ROWBEGIN");
  return m;
}

namespace {

const OidNode* lookup_parent(Registry& registry, const CompiledMibModule& m, std::string_view head) {
  if (head == "zero") return &registry.root();
  if (auto* node = registry.find(m.header.name, head)) return node;
  for (const auto& imp : m.header.imports) {
    if (imp.symbol != head) continue;
    if (auto* node = registry.find(imp.module, head)) return node;
  }
  return registry.find(head);
}

}  // namespace

std::string load_compiled(Registry& registry, const CompiledMibModule& m,
                          std::vector<std::string>* warnings) {
  if (warnings) {
    std::set<std::string> missing;
    for (const auto& imp : m.header.imports)
      if (!registry.has_module(imp.module)) missing.insert(imp.module);
    for (const auto& mod : missing)
      warnings->push_back(m.header.name + ": imported module " + mod + " is not loaded");
  }
  registry.note_module(m.header.name);
  for (const auto& rec : m.records) {
    if (const auto* a = std::get_if<OidAssignment>(&rec)) {
      auto dot = a->parent.find('.');
      std::string head = a->parent.substr(0, dot);
      const OidNode* parent = lookup_parent(registry, m, head);
      if (!parent) {
        throw LoadError(m.header.name + "::" + a->name + ": unresolvable parent '" + a->parent + "'");
      }
      Oid arcs;
      if (dot != std::string::npos) {
        std::string_view rest = std::string_view(a->parent).substr(dot + 1);
        while (!rest.empty()) {
          auto next = rest.find('.');
          auto arc = parse_arc(rest.substr(0, next));
          if (!arc) throw LoadError(m.header.name + "::" + a->name + ": malformed parent '" + a->parent + "'");
          arcs.push_back(*arc);
          rest = next == std::string_view::npos ? std::string_view() : rest.substr(next + 1);
        }
      }
      NodeInfo info;
      info.kind = a->kind;
      info.syntax = a->syntax;
      if (a->max_access) info.max_access = parse_access(*a->max_access);
      if (a->status) info.status = parse_status(*a->status);
      info.description = a->description;
      try {
        registry.register_oid(m.header.name, a->name, OidRef(*parent, arcs), a->arc, info);
      } catch (const ConflictError& e) {
        throw LoadError(m.header.name + "::" + a->name + ": " + e.what());
      }
    } else {
      registry.add_row_schema(std::get<RowSchema>(rec));
    }
  }
  return m.header.name;
}

std::string load_compiled(Registry& registry, std::istream& source, std::vector<std::string>* warnings) {
  return load_compiled(registry, read_compiled(source), warnings);
}

std::vector<std::string> load_compiled_files(Registry& registry,
                                             const std::vector<std::filesystem::path>& files,
                                             std::vector<std::string>* warnings) {
  std::vector<CompiledMibModule> mods;
  for (const auto& path : files) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open " + path.string());
    try {
      mods.push_back(read_compiled(in));
    } catch (const LoadError& e) {
      throw LoadError(path.string() + ": " + e.what());
    }
  }
  std::map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < mods.size(); ++i) by_name.emplace(mods[i].header.name, i);

  std::vector<int> state(mods.size(), 0);
  std::vector<std::string> loaded;
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    if (state[i] != 0) return;  // in progress: import cycle, load in file order
    state[i] = 1;
    for (const auto& imp : mods[i].header.imports) {
      auto it = by_name.find(imp.module);
      if (it != by_name.end()) visit(it->second);
    }
    state[i] = 2;
    loaded.push_back(load_compiled(registry, mods[i], warnings));
  };
  for (std::size_t i = 0; i < mods.size(); ++i) visit(i);
  return loaded;
}

std::vector<std::string> load_mib_path(Registry& registry, std::string_view search_path,
                                       std::vector<std::string>* warnings) {
  std::vector<std::filesystem::path> files;
  while (!search_path.empty()) {
    auto sep = search_path.find(':');
    std::filesystem::path dir(std::string(search_path.substr(0, sep)));
    search_path = sep == std::string_view::npos ? std::string_view() : search_path.substr(sep + 1);
    std::error_code ec;
    if (dir.empty() || !std::filesystem::is_directory(dir, ec)) continue;
    std::vector<std::filesystem::path> here;
    for (const auto& entry : std::filesystem::directory_iterator(dir, ec))
      if (entry.path().extension() == ".cmib") here.push_back(entry.path());
    std::sort(here.begin(), here.end());
    files.insert(files.end(), here.begin(), here.end());
  }
  return load_compiled_files(registry, files, warnings);
}

std::string default_mib_path() {
  const char* env = std::getenv("SNMP_MIB_PATH");
  if (env && *env) return env;
  return SNMPKIT_MIB_DIR;
}

Registry& default_registry() {
  static Registry* registry = [] {
    auto* r = new Registry();
    load_mib_path(*r, default_mib_path());
    return r;
  }();
  return *registry;
}

TableSchema table_schema(const Registry& registry, std::string_view table_name) {
  const OidNode* table = registry.find(table_name);
  if (!table) throw NotATableError(std::string(table_name) + " is not a known object");
  const auto& syntax = table->info().syntax;
  static constexpr std::string_view kSeqOf = "SEQUENCE OF ";
  if (!syntax || syntax->rfind(kSeqOf, 0) != 0)
    throw NotATableError(std::string(table_name) + " is not a table");
  const std::string entry_type = syntax->substr(kSeqOf.size());

  const OidNode* entry = nullptr;
  for (const auto* child : table->children())
    if (child->info().syntax == entry_type) entry = child;
  if (!entry) entry = table->child(1);
  if (!entry) throw NotATableError(std::string(table_name) + " has no conceptual row");

  const RowSchema* row = nullptr;
  if (table->module()) row = registry.row_schema(*table->module(), entry_type);
  if (!row) row = registry.row_schema(entry_type);
  if (!row) throw NotATableError(std::string(table_name) + ": no row schema for " + entry_type);

  TableSchema out{table, entry, row, {}};
  for (std::size_t i = 0; i < row->columns.size(); ++i) {
    const OidNode* col = entry->child_named(row->columns[i].name);
    if (!col) col = entry->child(static_cast<std::uint32_t>(i + 1));
    if (!col) throw NotATableError(std::string(table_name) + ": column " + row->columns[i].name + " missing");
    out.columns.push_back(col);
  }
  return out;
}

}  // namespace snmp::mib
