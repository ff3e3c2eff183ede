#pragma once

// Compiler for the SMI subset of ASN.1. MIB source text is tokenized,
// parsed into OID assignments and row schemas, and written to a line-based
// "compiled MIB" file that load_compiled() applies to a Registry.
//
// Compiled file layout (UTF-8, LF):
//   CMIB 1
//   MODULE <name>
//   IMP\t<symbol>\t<module>
//   OID\t<name>\t<parent>\t<arc>\t<kind>\t<syntax|->\t<access|->\t<status|->\t<description|->
//   ROWBEGIN\t<TypeName>
//   COL\t<name>\t<syntax>
//   ROWEND
// <parent> is a name optionally followed by dotted arcs ("iso.3.6"); "zero"
// denotes the tree root.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "snmpkit/error.hpp"
#include "snmpkit/oid.hpp"

namespace snmp::mib {

enum class TokenKind { name, number, string, punctuation, assign, range, keyword };

struct Token {
  TokenKind kind;
  std::string text;
  int line = 0;
  int column = 0;
  friend bool operator==(const Token&, const Token&) = default;
};

class LexError : public Error {
 public:
  LexError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class SmiParseError : public Error {
 public:
  SmiParseError(const std::string& message, int line, int column, std::vector<std::string> expected);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::vector<std::string>& expected() const { return expected_; }

 private:
  int line_;
  int column_;
  std::vector<std::string> expected_;
};

/// Compiled file is malformed, has the wrong version, or cannot be applied.
class LoadError : public Error {
 public:
  using Error::Error;
};

class NotATableError : public Error {
 public:
  using Error::Error;
};

std::vector<Token> tokenize(std::string_view source);

struct OidAssignment {
  std::string module;
  std::string name;
  std::string parent;  // "name" or "name.arc.arc"
  std::uint32_t arc = 0;
  NodeKind kind = NodeKind::plain;
  std::optional<std::string> syntax;
  std::optional<std::string> max_access;
  std::optional<std::string> status;
  std::optional<std::string> description;
  friend bool operator==(const OidAssignment&, const OidAssignment&) = default;
};

struct ImportRecord {
  std::string symbol;
  std::string module;
  friend bool operator==(const ImportRecord&, const ImportRecord&) = default;
};

struct ModuleHeader {
  std::string name;
  std::vector<ImportRecord> imports;
  friend bool operator==(const ModuleHeader&, const ModuleHeader&) = default;
};

using CompiledRecord = std::variant<OidAssignment, RowSchema>;

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;
};

struct CompiledMibModule {
  ModuleHeader header;
  /// OID assignments parent-before-child, then row schemas in source order.
  std::vector<CompiledRecord> records;
  /// Constructs that were skipped. Not part of the compiled file.
  std::vector<Diagnostic> warnings;
};

CompiledMibModule parse_module(const std::vector<Token>& tokens);

inline CompiledMibModule compile(std::string_view source) { return parse_module(tokenize(source)); }

void emit(const CompiledMibModule& module, std::ostream& sink);
std::string emit_to_string(const CompiledMibModule& module);

/// Parses the compiled file format without touching any registry.
CompiledMibModule read_compiled(std::istream& source);

/// Applies every record of a compiled file in file order. Returns the module
/// name. Imports of modules not yet loaded are reported through `warnings`.
std::string load_compiled(Registry& registry, std::istream& source,
                          std::vector<std::string>* warnings = nullptr);
std::string load_compiled(Registry& registry, const CompiledMibModule& module,
                          std::vector<std::string>* warnings = nullptr);

/// Loads several compiled files, ordering them so imported modules come first.
std::vector<std::string> load_compiled_files(Registry& registry,
                                             const std::vector<std::filesystem::path>& files,
                                             std::vector<std::string>* warnings = nullptr);

/// Loads every *.cmib file found in a ':'-separated list of directories.
std::vector<std::string> load_mib_path(Registry& registry, std::string_view search_path,
                                       std::vector<std::string>* warnings = nullptr);

/// Search path from SNMP_MIB_PATH, else the directory of bundled modules.
std::string default_mib_path();

/// Process-wide registry, loaded from default_mib_path() on first use.
Registry& default_registry();

struct TableSchema {
  const OidNode* table = nullptr;
  const OidNode* entry = nullptr;
  const RowSchema* row = nullptr;
  /// Column nodes in schema order; column i sits at arc i + 1 of the entry.
  std::vector<const OidNode*> columns;
};

TableSchema table_schema(const Registry& registry, std::string_view table_name);

}  // namespace snmp::mib
