#pragma once

// The MIB tree. Named OID nodes form one tree rooted at "zero"; each node
// stores only its own arc and reaches the full number list through its
// parent chain. Instances such as sysDescr.0 are never inserted: they are
// OidRef values, a named node plus trailing unnamed arcs.

#include <cstdint>
#include <initializer_list>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "snmpkit/bytes.hpp"
#include "snmpkit/error.hpp"

namespace snmp::mib {

enum class NodeKind { plain, object_type, module_identity, other };
enum class Access { not_accessible, read_only, read_write, read_create, accessible_for_notify };
enum class Status { current, deprecated, obsolete };

std::string_view to_string(NodeKind kind);
std::string_view to_string(Access access);
std::string_view to_string(Status status);
std::optional<NodeKind> parse_node_kind(std::string_view text);
/// Accepts SMIv2 spellings plus the SMIv1 "read-only"/"write-only"/"mandatory" family.
std::optional<Access> parse_access(std::string_view text);
std::optional<Status> parse_status(std::string_view text);

/// Optional MIB metadata attached to a node. Absent fields are merged on
/// re-registration, present ones are kept.
struct NodeInfo {
  std::optional<NodeKind> kind;
  std::optional<std::string> syntax;
  std::optional<Access> max_access;
  std::optional<Status> status;
  std::optional<std::string> description;
};

class OidNode {
 public:
  OidNode(const OidNode&) = delete;
  OidNode& operator=(const OidNode&) = delete;

  const std::optional<std::string>& name() const { return name_; }
  std::uint32_t arc() const { return arc_; }
  const OidNode* parent() const { return parent_; }
  const std::optional<std::string>& module() const { return module_; }
  NodeKind kind() const { return info_.kind.value_or(NodeKind::plain); }
  const NodeInfo& info() const { return info_; }

  const OidNode* child(std::uint32_t arc) const;
  const OidNode* child_named(std::string_view name) const;
  /// Snapshot of the current children in arc order.
  std::vector<const OidNode*> children() const;

 private:
  friend class Registry;
  OidNode(std::uint32_t arc, OidNode* parent) : arc_(arc), parent_(parent) {}

  std::optional<std::string> name_;
  std::uint32_t arc_;
  OidNode* parent_;
  std::optional<std::string> module_;
  NodeInfo info_;
  std::map<std::uint32_t, std::unique_ptr<OidNode>> children_;
};

/// A node plus unnamed trailing arcs. Valid as long as its registry lives.
class OidRef {
 public:
  OidRef(const OidNode& node, Oid rest = {}) : node_(&node), rest_(std::move(rest)) {}

  const OidNode& node() const { return *node_; }
  const Oid& rest() const { return rest_; }

  Oid number_list() const;
  std::vector<std::string> name_list() const;
  /// "MODULE::name.1.2" for named nodes, dotted numbers otherwise.
  std::string to_string() const;

  /// Equal number lists.
  friend bool operator==(const OidRef& a, const OidRef& b) {
    return a.number_list() == b.number_list();
  }

 private:
  const OidNode* node_;
  Oid rest_;
};

Oid number_list(const OidRef& ref);
Oid number_list(const OidNode& node);
std::vector<std::string> name_list(const OidRef& ref);
std::vector<const OidNode*> list_children(const OidNode& node);

/// One element of a mixed specification such as {OidRef("sysDescr"), 0}.
using OidSegment = std::variant<OidRef, std::string, std::uint32_t>;

/// Every accepted way of naming an OID: text ("sysDescr.0",
/// "SNMPv2-MIB::sysDescr.0", "system.sysDescr.0", "1.3.6.1.2.1.1.1.0",
/// ".1.3...", "0.1.3..."), an arc list, a mixed list, or a resolved ref.
class OidSpec {
 public:
  OidSpec(const char* text) : v_(std::string(text)) {}
  OidSpec(std::string text) : v_(std::move(text)) {}
  OidSpec(std::string_view text) : v_(std::string(text)) {}
  OidSpec(Oid arcs) : v_(std::move(arcs)) {}
  OidSpec(std::initializer_list<std::uint32_t> arcs) : v_(Oid(arcs)) {}
  OidSpec(std::span<const std::uint32_t> arcs) : v_(Oid(arcs.begin(), arcs.end())) {}
  OidSpec(std::vector<OidSegment> mixed) : v_(std::move(mixed)) {}
  OidSpec(OidRef ref) : v_(std::move(ref)) {}
  OidSpec(const OidNode& node) : v_(OidRef(node)) {}

  using Variant = std::variant<std::string, Oid, std::vector<OidSegment>, OidRef>;
  const Variant& variant() const { return v_; }

 private:
  Variant v_;
};

class ResolveError : public Error {
 public:
  ResolveError(std::string message, std::string segment)
      : Error(std::move(message)), segment_(std::move(segment)) {}
  const std::string& segment() const { return segment_; }

 private:
  std::string segment_;
};

class OidParseError : public Error {
 public:
  using Error::Error;
};

class ConflictError : public Error {
 public:
  using Error::Error;
};

struct Column {
  std::string name;
  std::string syntax;
  friend bool operator==(const Column&, const Column&) = default;
};

/// Column layout of a conceptual row, in SEQUENCE order.
struct RowSchema {
  std::string module;
  std::string type_name;
  std::vector<Column> columns;
  friend bool operator==(const RowSchema&, const RowSchema&) = default;
};

class Registry {
 public:
  /// Creates the root "zero" (arc 0) with iso(1) beneath it.
  Registry();
  Registry(const Registry&) = delete;
  Registry& operator=(const Registry&) = delete;
  ~Registry();

  const OidNode& root() const { return *root_; }

  OidRef resolve(const OidSpec& spec) const;

  /// Idempotent: an existing child at `arc` is returned with absent metadata
  /// filled in. A differently named child at the same arc is a conflict.
  const OidNode& register_oid(std::string_view module, std::string_view name, const OidRef& parent,
                              std::uint32_t arc, const NodeInfo& info = {});

  /// Walks `arcs` below `from`, creating unnamed intermediate nodes.
  const OidNode& ensure_path(const OidNode& from, std::span<const std::uint32_t> arcs);

  /// Unqualified lookup; the most recently loaded module wins.
  const OidNode* find(std::string_view name) const;
  const OidNode* find(std::string_view module, std::string_view name) const;
  /// True when an unqualified name maps to more than one node.
  bool is_ambiguous(std::string_view name) const;

  void add_row_schema(RowSchema schema);
  const RowSchema* row_schema(std::string_view module, std::string_view type_name) const;
  const RowSchema* row_schema(std::string_view type_name) const;

  void note_module(std::string_view module);
  bool has_module(std::string_view module) const;
  std::vector<std::string> modules() const;

 private:
  OidNode* lookup_name(std::string_view name) const;
  OidRef walk(const OidNode& start, std::span<const std::string> segments, std::size_t first,
              const std::string& whole) const;
  OidRef resolve_text(const std::string& text) const;
  OidRef resolve_arcs(const OidNode& start, const Oid& arcs) const;
  OidRef resolve_mixed(const std::vector<OidSegment>& mixed) const;
  void index_name(OidNode& node, std::string_view module, std::string_view name);

  std::unique_ptr<OidNode> root_;
  std::map<std::string, std::vector<OidNode*>, std::less<>> names_;
  std::map<std::string, std::map<std::string, OidNode*, std::less<>>, std::less<>> modules_;
  std::map<std::string, std::map<std::string, RowSchema, std::less<>>, std::less<>> schemas_;
  std::vector<std::string> module_order_;
  mutable std::shared_mutex mutex_;
};

/// Smallest element of `sorted` strictly greater than `after`, if any.
std::optional<Oid> lexicographic_successor(std::span<const Oid> sorted, const Oid& after);

}  // namespace snmp::mib
