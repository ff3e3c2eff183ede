#include <gtest/gtest.h>

#include <sstream>

#include "snmpkit/smi.hpp"
#include "support.hpp"

using namespace snmp;
using namespace snmp::mib;

namespace {

std::vector<std::pair<TokenKind, std::string>> kinds(const std::vector<Token>& tokens) {
  std::vector<std::pair<TokenKind, std::string>> out;
  for (const auto& t : tokens) out.emplace_back(t.kind, t.text);
  return out;
}

const OidAssignment* find_oid(const CompiledMibModule& m, std::string_view name) {
  for (const auto& r : m.records)
    if (auto* a = std::get_if<OidAssignment>(&r); a && a->name == name) return a;
  return nullptr;
}

const RowSchema* find_row(const CompiledMibModule& m, std::string_view type) {
  for (const auto& r : m.records)
    if (auto* s = std::get_if<RowSchema>(&r); s && s->type_name == type) return s;
  return nullptr;
}

std::string wrap(const std::string& body) {
  return "T-MIB DEFINITIONS ::= BEGIN\nIMPORTS mib-2 FROM SNMPv2-SMI;\n" + body + "\nEND\n";
}

}  // namespace

TEST(SmiTokenize, MacroInvocationHead) {
  using K = TokenKind;
  EXPECT_EQ(kinds(tokenize("sysDescr OBJECT-TYPE")),
            (std::vector<std::pair<K, std::string>>{{K::name, "sysDescr"}, {K::keyword, "OBJECT-TYPE"}}));
}

TEST(SmiTokenize, CommentsVanish) {
  using K = TokenKind;
  EXPECT_EQ(kinds(tokenize("-- comment\nX")), (std::vector<std::pair<K, std::string>>{{K::name, "X"}}));
  EXPECT_EQ(kinds(tokenize("a -- inline -- b")),
            (std::vector<std::pair<K, std::string>>{{K::name, "a"}, {K::name, "b"}}));
  EXPECT_EQ(kinds(tokenize("a--x\nb")), (std::vector<std::pair<K, std::string>>{{K::name, "a"}, {K::name, "b"}}));
}

TEST(SmiTokenize, AssignmentValue) {
  using K = TokenKind;
  EXPECT_EQ(kinds(tokenize("::= { system 1 }")),
            (std::vector<std::pair<K, std::string>>{{K::assign, "::="},
                                                    {K::punctuation, "{"},
                                                    {K::name, "system"},
                                                    {K::number, "1"},
                                                    {K::punctuation, "}"}}));
}

TEST(SmiTokenize, StringsAndPositions) {
  auto t = tokenize("x\n  \"two\nlines\" (0..255)");
  ASSERT_EQ(t.size(), 7u);
  EXPECT_EQ(t[1].kind, TokenKind::string);
  EXPECT_EQ(t[1].text, "two\nlines");
  EXPECT_EQ(t[1].line, 2);
  EXPECT_EQ(t[1].column, 3);
  EXPECT_EQ(t[4].kind, TokenKind::range);
  EXPECT_EQ(t[3].text, "0");
  EXPECT_EQ(t[5].text, "255");
}

TEST(SmiTokenize, UnterminatedString) {
  try {
    tokenize("a\n b \"never closed");
    FAIL();
  } catch (const LexError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 4);
  }
}

TEST(SmiParse, SysDescr) {
  auto m = compile(testsupport::mib_source("SNMPv2-MIB"));
  const OidAssignment* a = find_oid(m, "sysDescr");
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->parent, "system");
  EXPECT_EQ(a->arc, 1u);
  EXPECT_EQ(a->kind, NodeKind::object_type);
  EXPECT_EQ(a->syntax, std::optional<std::string>("DisplayString"));
  EXPECT_EQ(a->max_access, std::optional<std::string>("read-only"));
  EXPECT_EQ(a->status, std::optional<std::string>("current"));
  ASSERT_TRUE(a->description);
  EXPECT_EQ(a->description->rfind("A textual description of the entity. This value should include", 0), 0u);
  EXPECT_EQ(a->description->find('\n'), std::string::npos);
}

TEST(SmiParse, IfEntrySchema) {
  auto m = compile(testsupport::mib_source("IF-MIB"));
  const RowSchema* row = find_row(m, "IfEntry");
  ASSERT_NE(row, nullptr);
  ASSERT_EQ(row->columns.size(), 22u);
  EXPECT_EQ(row->columns[0], (Column{"ifIndex", "InterfaceIndex"}));
  EXPECT_EQ(row->columns[1], (Column{"ifDescr", "DisplayString"}));
  EXPECT_EQ(row->columns[21], (Column{"ifSpecific", "OBJECT IDENTIFIER"}));
}

TEST(SmiParse, MultiArcAssignment) {
  auto m = compile("X DEFINITIONS ::= BEGIN internet OBJECT IDENTIFIER ::= { iso 3 6 1 } END");
  const OidAssignment* a = find_oid(m, "internet");
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->parent, "iso.3.6");
  EXPECT_EQ(a->arc, 1u);
  Registry reg;
  load_compiled(reg, m);
  EXPECT_EQ(reg.resolve("internet").number_list(), (Oid{1, 3, 6, 1}));
  // Anonymous intermediates stay unnamed.
  EXPECT_FALSE(reg.root().child(1)->child(3)->name());
}

TEST(SmiParse, NamedIntermediates) {
  auto m = compile("X DEFINITIONS ::= BEGIN internet OBJECT IDENTIFIER ::= { iso org(3) dod(6) 1 } END");
  Registry reg;
  load_compiled(reg, m);
  EXPECT_EQ(reg.resolve("dod").number_list(), (Oid{1, 3, 6}));
  EXPECT_EQ(reg.resolve("internet").number_list(), (Oid{1, 3, 6, 1}));
}

TEST(SmiParse, SyntaxConstraintsDropped) {
  auto m = compile(wrap(R"(
x OBJECT-TYPE
  SYNTAX INTEGER { up(1), down(2) }
  MAX-ACCESS read-write
  STATUS current
  DESCRIPTION "d"
  DEFVAL { up }
  ::= { mib-2 99 }
y OBJECT-TYPE
  SYNTAX OCTET STRING (SIZE (0..255 | 300))
  ACCESS read-only
  STATUS mandatory
  ::= { mib-2 98 })"));
  EXPECT_EQ(find_oid(m, "x")->syntax, std::optional<std::string>("INTEGER"));
  EXPECT_EQ(find_oid(m, "y")->syntax, std::optional<std::string>("OCTET STRING"));
  EXPECT_EQ(find_oid(m, "y")->max_access, std::optional<std::string>("read-only"));
  EXPECT_FALSE(find_oid(m, "y")->description);
}

TEST(SmiParse, UnknownMacroBecomesOther) {
  auto m = compile(wrap(R"(
caps AGENT-CAPABILITIES
  PRODUCT-RELEASE "1"
  STATUS current
  DESCRIPTION "d"
  SUPPORTS SNMPv2-MIB INCLUDES { systemGroup }
  ::= { mib-2 97 }
weird FANCY-MACRO whatever { a b } ::= { mib-2 96 }
t TRAP-TYPE ENTERPRISE mib-2 ::= 3)"));
  EXPECT_EQ(find_oid(m, "caps")->kind, NodeKind::other);
  EXPECT_EQ(find_oid(m, "weird")->kind, NodeKind::other);
  EXPECT_EQ(find_oid(m, "t"), nullptr);
  ASSERT_EQ(m.warnings.size(), 1u);
  EXPECT_NE(m.warnings[0].message.find("TRAP-TYPE"), std::string::npos);
}

TEST(SmiParse, SyntaxErrorHasPositionAndExpected) {
  try {
    compile("X DEFINITIONS ::= BEGIN\nfoo OBJECT IDENTIFIER ::= system 1 }\nEND");
    FAIL();
  } catch (const SmiParseError& e) {
    EXPECT_EQ(e.line(), 2);
    EXPECT_EQ(e.column(), 27);
    EXPECT_EQ(e.expected(), std::vector<std::string>{"{"});
  }
  EXPECT_THROW(compile("X DEFINITIONS ::= BEGIN"), SmiParseError);
  EXPECT_THROW(compile("X ::= BEGIN END"), SmiParseError);
}

TEST(SmiParse, TopologicalOrder) {
  auto m = compile(wrap("b OBJECT IDENTIFIER ::= { a 2 }\na OBJECT IDENTIFIER ::= { mib-2 1 }"));
  ASSERT_EQ(m.records.size(), 2u);
  EXPECT_EQ(std::get<OidAssignment>(m.records[0]).name, "a");
  EXPECT_EQ(std::get<OidAssignment>(m.records[1]).name, "b");
}

TEST(SmiParse, Deterministic) {
  for (const char* module : testsupport::kCorpus) {
    std::string src = testsupport::mib_source(module);
    EXPECT_EQ(emit_to_string(compile(src)), emit_to_string(compile(src))) << module;
  }
}

TEST(SmiEmit, EmptyModuleIsHeaderOnly) {
  auto m = compile("EMPTY-MIB DEFINITIONS ::= BEGIN END");
  EXPECT_EQ(emit_to_string(m), "CMIB 1\nMODULE EMPTY-MIB\n");
}

TEST(SmiEmit, RecordLines) {
  auto m = compile(wrap(R"(
x OBJECT-TYPE
  SYNTAX Integer32
  MAX-ACCESS read-only
  STATUS current
  DESCRIPTION "tab	and back\slash"
  ::= { mib-2 99 }
R ::= SEQUENCE { c1 Integer32, c2 OCTET STRING (SIZE(1)) })"));
  EXPECT_EQ(emit_to_string(m),
            "CMIB 1\nMODULE T-MIB\nIMP\tmib-2\tSNMPv2-SMI\n"
            "OID\tx\tmib-2\t99\tobject-type\tInteger32\tread-only\tcurrent\ttab and back\\\\slash\n"
            "ROWBEGIN\tR\nCOL\tc1\tInteger32\nCOL\tc2\tOCTET STRING\nROWEND\n");
}

TEST(SmiEmit, EscapesRoundTrip) {
  CompiledMibModule m;
  m.header.name = "E";
  OidAssignment a;
  a.module = "E";
  a.name = "n";
  a.parent = "zero";
  a.arc = 5;
  a.description = "line1\nline2\tx\\y";
  m.records.emplace_back(a);
  OidAssignment dash = a;
  dash.name = "d";
  dash.arc = 6;
  dash.description = "-";
  m.records.emplace_back(dash);
  std::istringstream in(emit_to_string(m));
  auto back = read_compiled(in);
  EXPECT_EQ(std::get<OidAssignment>(back.records[0]), a);
  EXPECT_EQ(std::get<OidAssignment>(back.records[1]), dash);
}

TEST(SmiEmit, Idempotent) {
  for (const char* module : testsupport::kCorpus) {
    std::string once = emit_to_string(compile(testsupport::mib_source(module)));
    std::istringstream in(once);
    EXPECT_EQ(emit_to_string(read_compiled(in)), once) << module;
  }
}

TEST(SmiLoad, SnmpV2MibResolves) {
  Registry reg;
  for (const char* module : {"SNMPv2-SMI", "SNMPv2-MIB"}) {
    std::istringstream in(emit_to_string(compile(testsupport::mib_source(module))));
    load_compiled(reg, in);
  }
  EXPECT_EQ(reg.resolve("sysDescr.0").number_list(), (Oid{1, 3, 6, 1, 2, 1, 1, 1, 0}));
  const OidNode* n = reg.find("sysDescr");
  EXPECT_EQ(n->info().max_access, Access::read_only);
  EXPECT_EQ(n->info().status, Status::current);
  EXPECT_EQ(n->module(), std::optional<std::string>("SNMPv2-MIB"));
}

TEST(SmiLoad, IfEntryRowSchema) {
  Registry reg;
  testsupport::load_corpus(reg);
  const RowSchema* row = reg.row_schema("IF-MIB", "IfEntry");
  ASSERT_NE(row, nullptr);
  EXPECT_EQ(row->columns.size(), 22u);
}

TEST(SmiLoad, Errors) {
  Registry reg;
  std::istringstream empty("");
  EXPECT_THROW(load_compiled(reg, empty), LoadError);
  std::istringstream version("CMIB 2\nMODULE X\n");
  EXPECT_THROW(load_compiled(reg, version), LoadError);
  std::istringstream orphan("CMIB 1\nMODULE X\nOID\tfoo\tnowhere\t1\tplain\t-\t-\t-\t-\n");
  try {
    load_compiled(reg, orphan);
    FAIL();
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find("foo"), std::string::npos);
  }
  std::istringstream bad_fields("CMIB 1\nMODULE X\nOID\tfoo\n");
  EXPECT_THROW(load_compiled(reg, bad_fields), LoadError);
}

TEST(SmiLoad, TwiceIsIdempotent) {
  Registry reg;
  testsupport::load_corpus(reg);
  const OidNode* before = reg.find("ifDescr");
  auto count = [&] {
    std::size_t n = 0;
    std::vector<const OidNode*> stack{&reg.root()};
    while (!stack.empty()) {
      auto* x = stack.back();
      stack.pop_back();
      ++n;
      for (auto* c : x->children()) stack.push_back(c);
    }
    return n;
  };
  std::size_t nodes = count();
  testsupport::load_corpus(reg);
  EXPECT_EQ(count(), nodes);
  EXPECT_EQ(reg.find("ifDescr"), before);
}

TEST(SmiLoad, MissingImportIsWarning) {
  Registry reg;
  std::vector<std::string> warnings;
  load_compiled(reg, compile(testsupport::mib_source("SNMPv2-SMI")), &warnings);
  EXPECT_TRUE(warnings.empty());
  load_compiled(reg, compile(testsupport::mib_source("SNMPv2-MIB")), &warnings);
  EXPECT_EQ(warnings.size(), 2u);  // SNMPv2-TC and SNMPv2-CONF
}

TEST(SmiLoad, DependencyOrderedFiles) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "snmpkit-smi-order";
  fs::create_directories(dir);
  std::vector<fs::path> files;
  for (const char* module : {"LISP-MIB", "IF-MIB", "SNMPv2-MIB", "SNMPv2-SMI"}) {
    fs::path p = dir / (std::string(module) + ".cmib");
    std::ofstream out(p);
    emit(compile(testsupport::mib_source(module)), out);
    files.push_back(p);
  }
  Registry reg;
  auto order = load_compiled_files(reg, files);
  EXPECT_EQ(order.front(), "SNMPv2-SMI");
  EXPECT_NO_THROW(reg.resolve("appFeatureName"));
  Registry reg2;
  load_mib_path(reg2, "/nonexistent:" + dir.string());
  EXPECT_NO_THROW(reg2.resolve("ifDescr"));
  fs::remove_all(dir);
}

TEST(SmiLoad, EquivalentToHandRegistration) {
  auto m = compile(testsupport::mib_source("LISP-MIB"));
  Registry loaded;
  Registry manual;
  for (Registry* r : {&loaded, &manual}) load_compiled(*r, compile(testsupport::mib_source("SNMPv2-SMI")));
  load_compiled(loaded, m);
  for (const auto& rec : m.records) {
    const auto* a = std::get_if<OidAssignment>(&rec);
    if (!a) continue;
    NodeInfo info;
    info.kind = a->kind;
    info.syntax = a->syntax;
    if (a->max_access) info.max_access = parse_access(*a->max_access);
    if (a->status) info.status = parse_status(*a->status);
    info.description = a->description;
    manual.register_oid(a->module, a->name, manual.resolve(a->parent), a->arc, info);
  }
  std::function<void(const OidNode&, const OidNode&)> same = [&](const OidNode& x, const OidNode& y) {
    ASSERT_EQ(x.name(), y.name());
    ASSERT_EQ(x.arc(), y.arc());
    ASSERT_EQ(x.module(), y.module());
    ASSERT_EQ(x.kind(), y.kind());
    ASSERT_EQ(x.info().syntax, y.info().syntax);
    ASSERT_EQ(x.info().description, y.info().description);
    auto xc = x.children();
    auto yc = y.children();
    ASSERT_EQ(xc.size(), yc.size());
    for (std::size_t i = 0; i < xc.size(); ++i) same(*xc[i], *yc[i]);
  };
  same(*loaded.find("lisp"), *manual.find("lisp"));
}

TEST(SmiCorpus, EveryObjectTypeResolves) {
  Registry reg;
  testsupport::load_corpus(reg);
  std::size_t objects = 0;
  for (const char* module : testsupport::kCorpus) {
    auto m = compile(testsupport::mib_source(module));
    for (const auto& rec : m.records) {
      const auto* a = std::get_if<OidAssignment>(&rec);
      if (!a || a->kind != NodeKind::object_type) continue;
      ++objects;
      EXPECT_NO_THROW(reg.resolve(a->name)) << a->name;
      EXPECT_NO_THROW(reg.resolve(std::string(module) + "::" + a->name)) << a->name;
    }
  }
  EXPECT_GT(objects, 60u);
}

TEST(SmiTable, IfTable) {
  Registry reg;
  testsupport::load_corpus(reg);
  TableSchema t = table_schema(reg, "ifTable");
  EXPECT_EQ(t.entry->name(), std::optional<std::string>("ifEntry"));
  ASSERT_EQ(t.columns.size(), 22u);
  EXPECT_EQ(t.columns[1]->name(), std::optional<std::string>("ifDescr"));
  EXPECT_EQ(t.columns[1]->arc(), 2u);
  for (std::size_t i = 0; i < t.columns.size(); ++i) EXPECT_EQ(t.columns[i]->arc(), i + 1);
}

TEST(SmiTable, NotATable) {
  Registry reg;
  testsupport::load_corpus(reg);
  EXPECT_THROW(table_schema(reg, "sysDescr"), NotATableError);
  EXPECT_THROW(table_schema(reg, "noSuchThing"), NotATableError);
}

TEST(SmiTable, CompositeIndexTable) {
  Registry reg;
  testsupport::load_corpus(reg);
  load_compiled(reg, compile(testsupport::read_file(std::string(SNMPKIT_TEST_DATA_DIR) + "/SNMPKIT-TEST-MIB.txt")));
  TableSchema t = table_schema(reg, "testPeerTable");
  ASSERT_EQ(t.columns.size(), 4u);
  EXPECT_EQ(t.row->columns[2].name, "testPeerName");
}
