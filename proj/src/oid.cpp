#include "snmpkit/oid.hpp"

#include <algorithm>
#include <charconv>
#include <mutex>

namespace snmp::mib {

namespace {

bool is_number(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::uint32_t parse_arc(std::string_view s, const std::string& whole) {
  std::uint32_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw OidParseError("malformed arc '" + std::string(s) + "' in '" + whole + "'");
  return v;
}

std::vector<std::string> split_dots(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto dot = text.find('.', start);
    parts.emplace_back(text.substr(start, dot == std::string_view::npos ? dot : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return parts;
}

void merge(NodeInfo& into, const NodeInfo& from) {
  if (!into.kind) into.kind = from.kind;
  if (!into.syntax) into.syntax = from.syntax;
  if (!into.max_access) into.max_access = from.max_access;
  if (!into.status) into.status = from.status;
  if (!into.description) into.description = from.description;
}

}  // namespace

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::plain: return "plain";
    case NodeKind::object_type: return "object-type";
    case NodeKind::module_identity: return "module-identity";
    case NodeKind::other: return "other";
  }
  return "plain";
}

std::string_view to_string(Access access) {
  switch (access) {
    case Access::not_accessible: return "not-accessible";
    case Access::read_only: return "read-only";
    case Access::read_write: return "read-write";
    case Access::read_create: return "read-create";
    case Access::accessible_for_notify: return "accessible-for-notify";
  }
  return "not-accessible";
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::current: return "current";
    case Status::deprecated: return "deprecated";
    case Status::obsolete: return "obsolete";
  }
  return "current";
}

std::optional<NodeKind> parse_node_kind(std::string_view text) {
  if (text == "plain") return NodeKind::plain;
  if (text == "object-type") return NodeKind::object_type;
  if (text == "module-identity") return NodeKind::module_identity;
  if (text == "other") return NodeKind::other;
  return std::nullopt;
}

std::optional<Access> parse_access(std::string_view text) {
  if (text == "not-accessible") return Access::not_accessible;
  if (text == "read-only") return Access::read_only;
  if (text == "read-write" || text == "write-only") return Access::read_write;
  if (text == "read-create") return Access::read_create;
  if (text == "accessible-for-notify") return Access::accessible_for_notify;
  return std::nullopt;
}

std::optional<Status> parse_status(std::string_view text) {
  if (text == "current" || text == "mandatory" || text == "optional") return Status::current;
  if (text == "deprecated") return Status::deprecated;
  if (text == "obsolete") return Status::obsolete;
  return std::nullopt;
}

const OidNode* OidNode::child(std::uint32_t arc) const {
  auto it = children_.find(arc);
  return it == children_.end() ? nullptr : it->second.get();
}

const OidNode* OidNode::child_named(std::string_view name) const {
  for (const auto& [arc, node] : children_)
    if (node->name_ && *node->name_ == name) return node.get();
  return nullptr;
}

std::vector<const OidNode*> OidNode::children() const {
  std::vector<const OidNode*> out;
  out.reserve(children_.size());
  for (const auto& [arc, node] : children_) out.push_back(node.get());
  return out;
}

Oid number_list(const OidNode& node) {
  Oid arcs;
  for (const OidNode* n = &node; n->parent(); n = n->parent()) arcs.push_back(n->arc());
  std::reverse(arcs.begin(), arcs.end());
  return arcs;
}

Oid OidRef::number_list() const {
  Oid arcs = mib::number_list(*node_);
  arcs.insert(arcs.end(), rest_.begin(), rest_.end());
  return arcs;
}

std::vector<std::string> OidRef::name_list() const {
  std::vector<std::string> names;
  for (const OidNode* n = node_; n->parent(); n = n->parent())
    names.push_back(n->name() ? *n->name() : std::to_string(n->arc()));
  std::reverse(names.begin(), names.end());
  for (auto arc : rest_) names.push_back(std::to_string(arc));
  return names;
}

std::string OidRef::to_string() const {
  if (node_->name() && node_->module()) {
    std::string out = *node_->module() + "::" + *node_->name();
    for (auto arc : rest_) out += "." + std::to_string(arc);
    return out;
  }
  return to_dotted(number_list());
}

Oid number_list(const OidRef& ref) { return ref.number_list(); }
std::vector<std::string> name_list(const OidRef& ref) { return ref.name_list(); }
std::vector<const OidNode*> list_children(const OidNode& node) { return node.children(); }

Registry::Registry() : root_(new OidNode(0, nullptr)) {
  root_->name_ = "zero";
  auto iso = std::unique_ptr<OidNode>(new OidNode(1, root_.get()));
  iso->name_ = "iso";
  index_name(*iso, "", "iso");
  root_->children_.emplace(1, std::move(iso));
}

Registry::~Registry() = default;

void Registry::index_name(OidNode& node, std::string_view module, std::string_view name) {
  auto& list = names_[std::string(name)];
  list.erase(std::remove(list.begin(), list.end(), &node), list.end());
  list.push_back(&node);
  if (!module.empty()) modules_[std::string(module)][std::string(name)] = &node;
}

OidNode* Registry::lookup_name(std::string_view name) const {
  auto it = names_.find(name);
  if (it == names_.end() || it->second.empty()) {
    if (name == "zero") return root_.get();
    return nullptr;
  }
  return it->second.back();
}

const OidNode* Registry::find(std::string_view name) const {
  std::shared_lock lock(mutex_);
  return lookup_name(name);
}

const OidNode* Registry::find(std::string_view module, std::string_view name) const {
  std::shared_lock lock(mutex_);
  auto m = modules_.find(module);
  if (m == modules_.end()) return nullptr;
  auto n = m->second.find(name);
  return n == m->second.end() ? nullptr : n->second;
}

bool Registry::is_ambiguous(std::string_view name) const {
  std::shared_lock lock(mutex_);
  auto it = names_.find(name);
  return it != names_.end() && it->second.size() > 1;
}

OidRef Registry::walk(const OidNode& start, std::span<const std::string> segments,
                      std::size_t first, const std::string& whole) const {
  const OidNode* cursor = &start;
  const OidNode* named = &start;
  Oid tail;
  for (std::size_t i = first; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    if (seg.empty()) throw OidParseError("empty arc in '" + whole + "'");
    if (is_number(seg)) {
      auto arc = parse_arc(seg, whole);
      const OidNode* next = cursor ? cursor->child(arc) : nullptr;
      if (next) {
        cursor = next;
        if (next->name()) {
          named = next;
          tail.clear();
        } else {
          tail.push_back(arc);
        }
      } else {
        cursor = nullptr;
        tail.push_back(arc);
      }
    } else if (seg[0] >= '0' && seg[0] <= '9') {
      throw OidParseError("malformed arc '" + seg + "' in '" + whole + "'");
    } else {
      const OidNode* next = cursor ? cursor->child_named(seg) : nullptr;
      if (!next) throw ResolveError("cannot resolve '" + seg + "' in '" + whole + "'", seg);
      cursor = next;
      named = next;
      tail.clear();
    }
  }
  return OidRef(*named, std::move(tail));
}

OidRef Registry::resolve_text(const std::string& text) const {
  std::string_view body = text;
  if (body.empty()) throw OidParseError("empty OID text");
  std::string module;
  if (auto sep = body.find("::"); sep != std::string_view::npos) {
    module = std::string(body.substr(0, sep));
    body = body.substr(sep + 2);
  }
  if (!body.empty() && body.front() == '.') body.remove_prefix(1);
  auto segments = split_dots(body);
  std::size_t first = 0;
  if (module.empty() && segments.size() > 1 && segments[0] == "0") first = 1;
  if (segments[first].empty()) throw OidParseError("empty arc in '" + text + "'");

  const auto& head = segments[first];
  if (is_number(head)) return walk(*root_, segments, first, text);
  if (head[0] >= '0' && head[0] <= '9')
    throw OidParseError("malformed arc '" + head + "' in '" + text + "'");

  const OidNode* anchor = nullptr;
  if (!module.empty()) {
    auto m = modules_.find(module);
    if (m == modules_.end()) throw ResolveError("unknown module '" + module + "'", module);
    auto n = m->second.find(head);
    if (n == m->second.end())
      throw ResolveError("cannot resolve '" + head + "' in module " + module, head);
    anchor = n->second;
  } else {
    anchor = lookup_name(head);
    if (!anchor) throw ResolveError("cannot resolve '" + head + "' in '" + text + "'", head);
  }
  return walk(*anchor, segments, first + 1, text);
}

OidRef Registry::resolve_arcs(const OidNode& start, const Oid& arcs) const {
  const OidNode* cursor = &start;
  const OidNode* named = &start;
  Oid tail;
  for (auto arc : arcs) {
    const OidNode* next = cursor ? cursor->child(arc) : nullptr;
    if (next) {
      cursor = next;
      if (next->name()) {
        named = next;
        tail.clear();
        continue;
      }
    } else {
      cursor = nullptr;
    }
    tail.push_back(arc);
  }
  return OidRef(*named, std::move(tail));
}

OidRef Registry::resolve_mixed(const std::vector<OidSegment>& mixed) const {
  if (mixed.empty()) throw OidParseError("empty OID list");
  std::optional<OidRef> ref;
  std::vector<std::string> pending;
  auto flush = [&]() {
    if (pending.empty()) return;
    std::string whole;
    for (const auto& p : pending) whole += (whole.empty() ? "" : ".") + p;
    // continue below the current position with the remaining segments
    OidRef base = ref ? *ref : OidRef(*root_);
    if (base.rest().empty()) {
      ref = walk(base.node(), pending, 0, whole);
    } else {
      for (const auto& p : pending) {
        if (!is_number(p)) throw ResolveError("cannot resolve '" + p + "' below an instance", p);
      }
      Oid rest = base.rest();
      for (const auto& p : pending) rest.push_back(parse_arc(p, whole));
      ref = OidRef(base.node(), std::move(rest));
    }
    pending.clear();
  };
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    const auto& seg = mixed[i];
    if (auto* r = std::get_if<OidRef>(&seg)) {
      if (i != 0) throw OidParseError("an OID reference may only start a list");
      ref = *r;
    } else if (auto* s = std::get_if<std::string>(&seg)) {
      if (i == 0) {
        ref = resolve_text(*s);
      } else {
        for (auto& part : split_dots(*s)) pending.push_back(part);
      }
    } else {
      pending.push_back(std::to_string(std::get<std::uint32_t>(seg)));
    }
  }
  flush();
  if (ref) {
    // re-anchor so trailing arcs that name registered nodes become the node
    return resolve_arcs(*root_, ref->number_list());
  }
  return OidRef(*root_);
}

OidRef Registry::resolve(const OidSpec& spec) const {
  std::shared_lock lock(mutex_);
  return std::visit(
      [this](const auto& v) -> OidRef {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return resolve_text(v);
        } else if constexpr (std::is_same_v<T, Oid>) {
          return resolve_arcs(*root_, v);
        } else if constexpr (std::is_same_v<T, std::vector<OidSegment>>) {
          return resolve_mixed(v);
        } else {
          return v;
        }
      },
      spec.variant());
}

const OidNode& Registry::register_oid(std::string_view module, std::string_view name,
                                      const OidRef& parent_ref, std::uint32_t arc,
                                      const NodeInfo& info) {
  std::unique_lock lock(mutex_);
  auto* parent = const_cast<OidNode*>(&parent_ref.node());
  for (auto a : parent_ref.rest()) {
    auto& slot = parent->children_[a];
    if (!slot) slot.reset(new OidNode(a, parent));
    parent = slot.get();
  }
  auto& slot = parent->children_[arc];
  if (!slot) slot.reset(new OidNode(arc, parent));
  OidNode& node = *slot;
  if (node.name_ && *node.name_ != name) {
    throw ConflictError("arc " + std::to_string(arc) + " under " +
                        OidRef(*parent).to_string() + " is already named '" + *node.name_ +
                        "', cannot register '" + std::string(name) + "'");
  }
  if (!node.name_) node.name_ = std::string(name);
  if (!node.module_ && !module.empty()) node.module_ = std::string(module);
  merge(node.info_, info);
  index_name(node, module, name);
  return node;
}

const OidNode& Registry::ensure_path(const OidNode& from, std::span<const std::uint32_t> arcs) {
  std::unique_lock lock(mutex_);
  auto* cursor = const_cast<OidNode*>(&from);
  for (auto a : arcs) {
    auto& slot = cursor->children_[a];
    if (!slot) slot.reset(new OidNode(a, cursor));
    cursor = slot.get();
  }
  return *cursor;
}

void Registry::add_row_schema(RowSchema schema) {
  std::unique_lock lock(mutex_);
  auto module = schema.module;
  auto type = schema.type_name;
  schemas_[module][type] = std::move(schema);
}

const RowSchema* Registry::row_schema(std::string_view module, std::string_view type_name) const {
  std::shared_lock lock(mutex_);
  auto m = schemas_.find(module);
  if (m == schemas_.end()) return nullptr;
  auto t = m->second.find(type_name);
  return t == m->second.end() ? nullptr : &t->second;
}

const RowSchema* Registry::row_schema(std::string_view type_name) const {
  std::shared_lock lock(mutex_);
  const RowSchema* found = nullptr;
  for (const auto& module : module_order_) {
    auto m = schemas_.find(module);
    if (m == schemas_.end()) continue;
    if (auto t = m->second.find(type_name); t != m->second.end()) found = &t->second;
  }
  if (!found) {
    for (const auto& [module, types] : schemas_)
      if (auto t = types.find(type_name); t != types.end()) found = &t->second;
  }
  return found;
}

void Registry::note_module(std::string_view module) {
  std::unique_lock lock(mutex_);
  auto it = std::find(module_order_.begin(), module_order_.end(), module);
  if (it != module_order_.end()) module_order_.erase(it);
  module_order_.emplace_back(module);
}

bool Registry::has_module(std::string_view module) const {
  std::shared_lock lock(mutex_);
  return std::find(module_order_.begin(), module_order_.end(), module) != module_order_.end();
}

std::vector<std::string> Registry::modules() const {
  std::shared_lock lock(mutex_);
  return module_order_;
}

std::optional<Oid> lexicographic_successor(std::span<const Oid> sorted, const Oid& after) {
  auto it = std::upper_bound(sorted.begin(), sorted.end(), after);
  if (it == sorted.end()) return std::nullopt;
  return *it;
}

}  // namespace snmp::mib
