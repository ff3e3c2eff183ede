#include "snmpkit/agent.hpp"

#include <sys/utsname.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>

namespace snmp::agent {

namespace {

constexpr std::size_t kMaxBulkBindings = 4096;

using Entry = HandlerMap::value_type;

const Entry* owner(const HandlerMap& handlers, const Oid& name) {
  auto it = handlers.upper_bound(name);
  if (it == handlers.begin()) return nullptr;
  --it;
  return starts_with(name, it->first) ? &*it : nullptr;
}

bool v1_representable(const ber::Value& v) { return !v.is<ber::Counter64>() && !v.is_exception(); }

Oid join(const Oid& base, const Oid& rest) {
  Oid out = base;
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

// Smallest instance strictly after `name` with a value.
std::optional<VarBind> next_after(const HandlerMap& handlers, const Oid& name, AgentContext& ctx, Version version) {
  auto it = handlers.upper_bound(name);
  if (it != handlers.begin()) {
    auto prev = std::prev(it);
    if (starts_with(name, prev->first)) it = prev;
  }
  for (; it != handlers.end(); ++it) {
    const auto& [base, handler] = *it;
    if (!handler.children || !handler.value) continue;
    auto instances = handler.children(ctx).expand();
    std::sort(instances.begin(), instances.end());
    auto first = instances.begin();
    if (starts_with(name, base)) {
      Oid rest(name.begin() + static_cast<std::ptrdiff_t>(base.size()), name.end());
      first = std::upper_bound(instances.begin(), instances.end(), rest);
    }
    for (auto inst = first; inst != instances.end(); ++inst) {
      auto value = handler.value(ctx, *inst);
      if (!value || (version == Version::v1 && !v1_representable(*value))) continue;
      return VarBind{join(base, *inst), std::move(*value)};
    }
  }
  return std::nullopt;
}

Pdu error_response(const Pdu& request, ErrorStatus status, std::size_t index) {
  Pdu out;
  out.type = PduType::response;
  out.request_id = request.request_id;
  out.error_status = static_cast<std::int32_t>(status);
  out.error_index = static_cast<std::int32_t>(index);
  out.bindings = request.bindings;
  return out;
}

// v2 error-status codes carried in a v1 response.
ErrorStatus for_v1(ErrorStatus s) {
  switch (s) {
    case ErrorStatus::wrong_value:
    case ErrorStatus::wrong_encoding:
    case ErrorStatus::wrong_type:
    case ErrorStatus::wrong_length:
    case ErrorStatus::inconsistent_value:
      return ErrorStatus::bad_value;
    case ErrorStatus::no_access:
    case ErrorStatus::not_writable:
    case ErrorStatus::no_creation:
    case ErrorStatus::inconsistent_name:
    case ErrorStatus::authorization_error:
      return ErrorStatus::no_such_name;
    case ErrorStatus::resource_unavailable:
    case ErrorStatus::commit_failed:
    case ErrorStatus::undo_failed:
      return ErrorStatus::gen_err;
    default:
      return s;
  }
}

Pdu do_get(const HandlerMap& handlers, const Pdu& request, Version version, AgentContext& ctx, Pdu out) {
  for (std::size_t i = 0; i < request.bindings.size(); ++i) {
    const Oid& name = request.bindings[i].name;
    const Entry* e = owner(handlers, name);
    std::optional<ber::Value> value;
    if (e && e->second.value && name.size() > e->first.size())
      value = e->second.value(ctx, Oid(name.begin() + static_cast<std::ptrdiff_t>(e->first.size()), name.end()));
    if (value && (version != Version::v1 || v1_representable(*value))) {
      out.bindings.push_back({name, std::move(*value)});
    } else if (version == Version::v1) {
      return error_response(request, ErrorStatus::no_such_name, i + 1);
    } else if (e) {
      out.bindings.push_back({name, ber::NoSuchInstance{}});
    } else {
      out.bindings.push_back({name, ber::NoSuchObject{}});
    }
  }
  return out;
}

Pdu do_get_next(const HandlerMap& handlers, const Pdu& request, Version version, AgentContext& ctx, Pdu out) {
  for (std::size_t i = 0; i < request.bindings.size(); ++i) {
    const Oid& name = request.bindings[i].name;
    if (auto next = next_after(handlers, name, ctx, version)) {
      out.bindings.push_back(std::move(*next));
    } else if (version == Version::v1) {
      return error_response(request, ErrorStatus::no_such_name, i + 1);
    } else {
      out.bindings.push_back({name, ber::EndOfMibView{}});
    }
  }
  return out;
}

Pdu do_get_bulk(const HandlerMap& handlers, const Pdu& request, AgentContext& ctx, Pdu out) {
  const std::size_t count = request.bindings.size();
  const std::size_t non_repeaters = std::min<std::size_t>(std::max(request.non_repeaters(), 0), count);
  const std::size_t repetitions = static_cast<std::size_t>(std::max(request.max_repetitions(), 0));
  for (std::size_t i = 0; i < non_repeaters; ++i) {
    const Oid& name = request.bindings[i].name;
    auto next = next_after(handlers, name, ctx, Version::v2c);
    out.bindings.push_back(next ? std::move(*next) : VarBind{name, ber::EndOfMibView{}});
  }
  std::vector<Oid> cursors;
  std::vector<bool> ended;
  for (std::size_t i = non_repeaters; i < count; ++i) {
    cursors.push_back(request.bindings[i].name);
    ended.push_back(false);
  }
  if (cursors.empty()) return out;
  for (std::size_t r = 0; r < repetitions && out.bindings.size() < kMaxBulkBindings; ++r) {
    bool any = false;
    for (std::size_t j = 0; j < cursors.size(); ++j) {
      std::optional<VarBind> next;
      if (!ended[j]) next = next_after(handlers, cursors[j], ctx, Version::v2c);
      if (next) {
        cursors[j] = next->name;
        out.bindings.push_back(std::move(*next));
        any = true;
      } else {
        ended[j] = true;
        out.bindings.push_back({cursors[j], ber::EndOfMibView{}});
      }
    }
    if (!any) break;
  }
  return out;
}

Pdu do_set(const HandlerMap& handlers, const Pdu& request, Version version, AgentContext& ctx, Pdu out) {
  std::vector<const Entry*> targets;
  for (std::size_t i = 0; i < request.bindings.size(); ++i) {
    const Entry* e = owner(handlers, request.bindings[i].name);
    if (!e || !e->second.set) {
      ErrorStatus status = ErrorStatus::not_writable;
      if (version == Version::v1) status = e ? ErrorStatus::read_only : ErrorStatus::no_such_name;
      return error_response(request, status, i + 1);
    }
    targets.push_back(e);
  }
  for (std::size_t i = 0; i < request.bindings.size(); ++i) {
    const auto& vb = request.bindings[i];
    const auto& base = targets[i]->first;
    ErrorStatus status =
        targets[i]->second.set(ctx, Oid(vb.name.begin() + static_cast<std::ptrdiff_t>(base.size()), vb.name.end()),
                               vb.value);
    if (status != ErrorStatus::no_error)
      return error_response(request, version == Version::v1 ? for_v1(status) : status, i + 1);
  }
  out.bindings = request.bindings;
  return out;
}

std::string host_name() {
  char buf[256] = {};
  if (gethostname(buf, sizeof buf - 1) != 0) return "localhost";
  return buf;
}

std::string compiler_name() {
#if defined(__clang__)
  return "Clang";
#elif defined(__GNUC__)
  return "GCC";
#else
  return "C++";
#endif
}

std::string compiler_version() {
#if defined(__clang__)
  return std::to_string(__clang_major__) + "." + std::to_string(__clang_minor__) + "." +
         std::to_string(__clang_patchlevel__);
#elif defined(__GNUC__)
  return std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__) + "." + std::to_string(__GNUC_PATCHLEVEL__);
#else
  return std::to_string(__cplusplus);
#endif
}

std::string cpu_model() {
  std::ifstream in("/proc/cpuinfo");
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("model name", 0) == 0) {
      auto colon = line.find(':');
      if (colon != std::string::npos) return line.substr(line.find_first_not_of(' ', colon + 1));
    }
  }
  utsname u{};
  uname(&u);
  return u.machine;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

const mib::OidNode& require(const mib::Registry& registry, std::string_view name) {
  mib::OidRef ref = registry.resolve(mib::OidSpec(std::string(name)));
  if (!ref.rest().empty()) throw ArgumentError(std::string(name) + " does not name a registered object");
  return ref.node();
}

ber::Value counter(const std::atomic<std::uint64_t>& c) {
  return ber::Counter32(static_cast<std::uint32_t>(c.load()));
}

}  // namespace

ChildSpec ChildSpec::list(std::vector<std::uint32_t> arcs) {
  ChildSpec s;
  for (auto a : arcs) s.instances_.push_back({a});
  return s;
}

ChildSpec ChildSpec::tuples(std::vector<Oid> instances) {
  ChildSpec s;
  s.instances_ = std::move(instances);
  return s;
}

std::vector<Oid> ChildSpec::expand() const {
  std::vector<Oid> out;
  if (count_) {
    if (*count_ == 0) return {{0}};
    for (std::uint32_t i = 1; i <= *count_; ++i) out.push_back({i});
    return out;
  }
  std::set<Oid> seen;
  for (const auto& inst : instances_)
    if (!inst.empty() && seen.insert(inst).second) out.push_back(inst);
  return out;
}

AgentContext::AgentContext(AgentConfig config, net::Clock& clock)
    : config_(std::move(config)), clock_(clock), start_(clock.now()) {}

std::uint32_t AgentContext::uptime_ticks() const {
  return static_cast<std::uint32_t>(static_cast<std::uint64_t>((clock_.now() - start_) * 100.0));
}

MibTree::MibTree() : handlers_(std::make_shared<HandlerMap>()) {}

void MibTree::register_variable(const mib::OidRef& base, Handler handler) {
  register_variable(base.number_list(), std::move(handler));
}

void MibTree::register_variable(const Oid& base, Handler handler) {
  if (base.empty()) throw ArgumentError("cannot register a handler at the root");
  std::lock_guard lock(mutex_);
  for (const auto& [existing, h] : *handlers_) {
    if (existing == base) continue;
    if (starts_with(base, existing) || starts_with(existing, base))
      throw ArgumentError(to_dotted(base) + " overlaps the handler at " + to_dotted(existing));
  }
  auto next = std::make_shared<HandlerMap>(*handlers_);
  (*next)[base] = std::move(handler);
  handlers_ = std::move(next);
}

bool MibTree::unregister_variable(const Oid& base) {
  std::lock_guard lock(mutex_);
  if (!handlers_->count(base)) return false;
  auto next = std::make_shared<HandlerMap>(*handlers_);
  next->erase(base);
  handlers_ = std::move(next);
  return true;
}

std::shared_ptr<const HandlerMap> MibTree::snapshot() const {
  std::lock_guard lock(mutex_);
  return handlers_;
}

void define_scalar(MibTree& tree, const mib::Registry& registry, std::string_view name, Supplier supplier) {
  const mib::OidNode& node = require(registry, name);
  Handler h;
  h.children = [](AgentContext&) { return ChildSpec(0); };
  h.value = [supplier = std::move(supplier)](AgentContext&, const Oid& rest) -> std::optional<ber::Value> {
    if (rest != Oid{0}) return std::nullopt;
    return supplier();
  };
  tree.register_variable(mib::OidRef(node), std::move(h));
}

void define_table_column(MibTree& tree, const mib::Registry& registry, std::string_view name,
                         std::function<ChildSpec(AgentContext&)> children,
                         std::function<std::optional<ber::Value>(AgentContext&, const Oid&)> value) {
  const mib::OidNode& node = require(registry, name);
  tree.register_variable(mib::OidRef(node), Handler{std::move(children), std::move(value), {}});
}

std::vector<VarBind> enumerate(const HandlerMap& handlers, AgentContext& ctx, Version version) {
  std::vector<VarBind> out;
  for (const auto& [base, handler] : handlers) {
    if (!handler.children || !handler.value) continue;
    auto instances = handler.children(ctx).expand();
    std::sort(instances.begin(), instances.end());
    for (const auto& inst : instances) {
      auto v = handler.value(ctx, inst);
      if (v && (version != Version::v1 || v1_representable(*v))) out.push_back({join(base, inst), std::move(*v)});
    }
  }
  return out;
}

Pdu dispatch(const HandlerMap& handlers, const Pdu& request, Version version, AgentContext& ctx) {
  Pdu out;
  out.type = PduType::response;
  out.request_id = request.request_id;
  switch (request.type) {
    case PduType::get_request: return do_get(handlers, request, version, ctx, std::move(out));
    case PduType::get_next_request: return do_get_next(handlers, request, version, ctx, std::move(out));
    case PduType::get_bulk_request:
      if (version == Version::v1) return error_response(request, ErrorStatus::gen_err, 0);
      return do_get_bulk(handlers, request, ctx, std::move(out));
    case PduType::set_request: return do_set(handlers, request, version, ctx, std::move(out));
    default: return error_response(request, ErrorStatus::gen_err, 0);
  }
}

Agent::Agent(AgentConfig config, net::Clock& clock) : ctx_(std::move(config), clock) {}

std::optional<Bytes> Agent::handle_packet(ByteView datagram) {
  ++ctx_.in_pkts;
  auto raw_version = peek_version(datagram);
  if (!raw_version) {
    ++ctx_.in_asn_parse_errs;
    return std::nullopt;
  }
  if (*raw_version != 0 && *raw_version != 1) {
    ++ctx_.in_bad_versions;
    return std::nullopt;
  }
  const Version version = static_cast<Version>(*raw_version);
  CommunityMessage msg;
  try {
    msg = std::get<CommunityMessage>(decode_message(datagram, version));
  } catch (const Error&) {
    ++ctx_.in_asn_parse_errs;
    return std::nullopt;
  }
  if (to_string(msg.community) != ctx_.config().community) {
    ++ctx_.in_bad_community_names;
    return std::nullopt;
  }
  switch (msg.pdu.type) {
    case PduType::get_request:
    case PduType::get_next_request:
    case PduType::get_bulk_request:
    case PduType::set_request:
      break;
    default:
      ++ctx_.silent_drops;
      return std::nullopt;
  }

  auto handlers = tree_.snapshot();
  CommunityMessage reply{version, msg.community, {}};
  {
    std::lock_guard lock(dispatch_mutex_);
    reply.pdu = dispatch(*handlers, msg.pdu, version, ctx_);
  }
  Bytes wire = encode_message(reply);
  if (wire.size() > net::kMaxDatagram && msg.pdu.type == PduType::get_bulk_request) {
    auto& b = reply.pdu.bindings;
    while (wire.size() > net::kMaxDatagram && !b.empty()) {
      b.resize(b.size() * 3 / 4);
      wire = encode_message(reply);
    }
  }
  if (wire.size() > net::kMaxDatagram) {
    reply.pdu = error_response(msg.pdu, ErrorStatus::too_big, 0);
    if (version != Version::v1) reply.pdu.bindings.clear();
    wire = encode_message(reply);
  }
  ++ctx_.out_pkts;
  return wire;
}

Service::Service(Agent& agent) : agent_(agent), listener_(agent.config().address, agent.config().port) {
  receiver_ = std::thread([this] { receive_loop(); });
  worker_ = std::thread([this] { work_loop(); });
}

Service::~Service() { stop(); }

void Service::stop() {
  std::lock_guard lock(stop_mutex_);
  running_ = false;
  listener_.close();
  queue_cv_.notify_all();
  if (receiver_.joinable()) receiver_.join();
  if (worker_.joinable()) worker_.join();
}

void Service::receive_loop() {
  while (running_) {
    std::optional<net::Datagram> d;
    try {
      d = listener_.receive(-1);
    } catch (const net::ClosedError&) {
      return;
    } catch (const net::NetworkError&) {
      continue;
    }
    if (!d) continue;
    std::lock_guard lock(queue_mutex_);
    if (queue_.size() >= agent_.config().queue_limit) {
      ++agent_.context().in_pkts;
      ++agent_.context().silent_drops;
      continue;
    }
    queue_.push_back(std::move(*d));
    queue_cv_.notify_one();
  }
}

void Service::work_loop() {
  for (;;) {
    net::Datagram d;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, [this] { return !running_ || !queue_.empty(); });
      if (!running_) return;
      d = std::move(queue_.front());
      queue_.pop_front();
    }
    auto reply = agent_.handle_packet(d.payload);
    if (!reply) continue;
    try {
      listener_.send_to(d.from, *reply);
    } catch (const net::NetworkError&) {
    }
  }
}

std::unique_ptr<Service> enable_service(Agent& agent) { return std::make_unique<Service>(agent); }

void disable_service(std::unique_ptr<Service>& service) {
  if (service) service->stop();
  service.reset();
}

std::string default_sys_descr() { return compiler_name() + " " + compiler_version() + " on " + host_name(); }

std::vector<std::string> builtin_features() {
  std::vector<std::string> out = {"c++20", compiler_name() + "-" + compiler_version(), "ber", "smi-compiler",
                                  "snmpv1", "snmpv2c", "snmpv3-usm-client", "hmac-md5-96", "hmac-sha1-96",
                                  "des-cbc", "ipv6"};
#if defined(__linux__)
  out.push_back("linux");
#endif
  return out;
}

void install_system_group(MibTree& tree, const mib::Registry& registry, AgentContext& ctx, SystemInfo info) {
  if (!registry.has_module("SNMPv2-MIB")) throw Error("SNMPv2-MIB is not loaded");
  const std::string descr = info.descr.empty() ? default_sys_descr() : info.descr;
  const std::string name = info.name.empty() ? host_name() : info.name;

  Oid object_id{0, 0};
  if (const auto* native = registry.find("LISP-MIB", "snmpKitAgentNative")) object_id = mib::number_list(*native);

  auto text = [](std::string s) { return [s = std::move(s)] { return ber::Value(ber::OctetString(s)); }; };
  define_scalar(tree, registry, "SNMPv2-MIB::sysDescr", text(descr));
  define_scalar(tree, registry, "SNMPv2-MIB::sysObjectID", [object_id] { return ber::Value(ber::ObjectId{object_id}); });
  define_scalar(tree, registry, "SNMPv2-MIB::sysUpTime", [&ctx] { return ber::Value(ber::TimeTicks(ctx.uptime_ticks())); });
  define_scalar(tree, registry, "SNMPv2-MIB::sysContact", text(info.contact));
  define_scalar(tree, registry, "SNMPv2-MIB::sysName", text(name));
  define_scalar(tree, registry, "SNMPv2-MIB::sysLocation", text(info.location));
  define_scalar(tree, registry, "SNMPv2-MIB::sysServices", [] { return ber::Value(ber::Integer(72)); });
  define_scalar(tree, registry, "SNMPv2-MIB::sysORLastChange", [] { return ber::Value(ber::TimeTicks(0)); });

  struct Capability {
    Oid id;
    std::string descr;
  };
  auto capabilities = std::make_shared<std::vector<Capability>>();
  if (const auto* n = registry.find("SNMPv2-MIB", "snmpMIB"))
    capabilities->push_back({mib::number_list(*n), "The MIB module for SNMP entities"});
  if (const auto* n = registry.find("LISP-MIB", "lisp"))
    capabilities->push_back({mib::number_list(*n), "The enterprise MIB for the host process"});
  auto rows = [capabilities](AgentContext&) { return ChildSpec::count(static_cast<std::uint32_t>(capabilities->size())); };
  auto row_of = [capabilities](const Oid& rest) -> const Capability* {
    if (rest.size() != 1 || rest[0] < 1 || rest[0] > capabilities->size()) return nullptr;
    return &(*capabilities)[rest[0] - 1];
  };
  if (!capabilities->empty()) {
    define_table_column(tree, registry, "SNMPv2-MIB::sysORID", rows,
                        [row_of](AgentContext&, const Oid& rest) -> std::optional<ber::Value> {
                          if (auto* c = row_of(rest)) return ber::ObjectId{c->id};
                          return std::nullopt;
                        });
    define_table_column(tree, registry, "SNMPv2-MIB::sysORDescr", rows,
                        [row_of](AgentContext&, const Oid& rest) -> std::optional<ber::Value> {
                          if (auto* c = row_of(rest)) return ber::OctetString(c->descr);
                          return std::nullopt;
                        });
    define_table_column(tree, registry, "SNMPv2-MIB::sysORUpTime", rows,
                        [row_of](AgentContext&, const Oid& rest) -> std::optional<ber::Value> {
                          if (row_of(rest)) return ber::TimeTicks(0);
                          return std::nullopt;
                        });
  }

  define_scalar(tree, registry, "SNMPv2-MIB::snmpInPkts", [&ctx] { return counter(ctx.in_pkts); });
  define_scalar(tree, registry, "SNMPv2-MIB::snmpInBadVersions", [&ctx] { return counter(ctx.in_bad_versions); });
  define_scalar(tree, registry, "SNMPv2-MIB::snmpInBadCommunityNames",
                [&ctx] { return counter(ctx.in_bad_community_names); });
  define_scalar(tree, registry, "SNMPv2-MIB::snmpInBadCommunityUses", [] { return ber::Value(ber::Counter32(0)); });
  define_scalar(tree, registry, "SNMPv2-MIB::snmpInASNParseErrs", [&ctx] { return counter(ctx.in_asn_parse_errs); });
  define_scalar(tree, registry, "SNMPv2-MIB::snmpEnableAuthenTraps", [] { return ber::Value(ber::Integer(2)); });
  define_scalar(tree, registry, "SNMPv2-MIB::snmpSilentDrops", [&ctx] { return counter(ctx.silent_drops); });
  define_scalar(tree, registry, "SNMPv2-MIB::snmpProxyDrops", [] { return ber::Value(ber::Counter32(0)); });
}

void install_enterprise_mib(MibTree& tree, const mib::Registry& registry, AgentContext& ctx,
                            std::function<std::vector<std::string>()> features) {
  if (!registry.has_module("LISP-MIB")) throw Error("LISP-MIB is not loaded");
  utsname u{};
  uname(&u);
  const std::string host = host_name();
  const std::string short_host = host.substr(0, host.find('.'));

  auto text = [](std::string s) { return [s = std::move(s)] { return ber::Value(ber::OctetString(s)); }; };
  define_scalar(tree, registry, "LISP-MIB::appImplementationType", text(compiler_name()));
  define_scalar(tree, registry, "LISP-MIB::appImplementationVersion", text(compiler_version()));
  define_scalar(tree, registry, "LISP-MIB::appLongSiteName", text(host));
  define_scalar(tree, registry, "LISP-MIB::appShortSiteName", text(short_host));
  define_scalar(tree, registry, "LISP-MIB::appMachineInstance", text(host));
  define_scalar(tree, registry, "LISP-MIB::appMachineType", text(u.machine));
  define_scalar(tree, registry, "LISP-MIB::appMachineVersion", text(cpu_model()));
  define_scalar(tree, registry, "LISP-MIB::appSoftwareType", text(u.sysname));
  define_scalar(tree, registry, "LISP-MIB::appSoftwareVersion", text(u.release));
  define_scalar(tree, registry, "LISP-MIB::appInternalRealTime",
                [&ctx] { return ber::Value(ber::TimeTicks(ctx.uptime_ticks())); });
  define_scalar(tree, registry, "LISP-MIB::appInternalRunTime", [] {
    auto ticks = static_cast<std::uint64_t>(std::clock()) * 100 / CLOCKS_PER_SEC;
    return ber::Value(ber::TimeTicks(static_cast<std::uint32_t>(ticks)));
  });
  define_scalar(tree, registry, "LISP-MIB::appInternalTimeUnitsPerSecond", [] { return ber::Value(ber::Integer(100)); });
  define_scalar(tree, registry, "LISP-MIB::appUniversalTime", [] { return ber::Value(ber::OctetString(utc_now())); });

  if (!features) features = builtin_features;
  define_table_column(
      tree, registry, "LISP-MIB::appFeatureName",
      [features](AgentContext&) {
        std::vector<std::uint32_t> arcs;
        auto n = features().size();
        for (std::uint32_t i = 1; i <= n; ++i) arcs.push_back(i);
        return ChildSpec::list(std::move(arcs));
      },
      [features](AgentContext&, const Oid& rest) -> std::optional<ber::Value> {
        auto names = features();
        if (rest.size() != 1 || rest[0] < 1 || rest[0] > names.size()) return std::nullopt;
        return ber::OctetString(names[rest[0] - 1]);
      });
}

ber::Value default_value(std::string_view syntax) {
  if (syntax == "Counter32" || syntax == "Counter") return ber::Counter32{0};
  if (syntax == "Gauge32" || syntax == "Gauge" || syntax == "Unsigned32") return ber::Gauge32{0};
  if (syntax == "Counter64") return ber::Counter64{0};
  if (syntax == "TimeTicks" || syntax == "TimeStamp") return ber::TimeTicks{0};
  if (syntax == "IpAddress") return ber::IpAddress{};
  if (syntax == "OBJECT IDENTIFIER" || syntax == "AutonomousType") return ber::ObjectId{{0, 0}};
  if (syntax == "Opaque") return ber::Opaque{};
  if (syntax == "INTEGER" || syntax == "Integer32" || syntax == "TimeInterval" || syntax == "TestAndIncr" ||
      syntax == "InterfaceIndex" || syntax == "InterfaceIndexOrZero" || syntax == "IANAifType")
    return ber::Integer(0);
  if (syntax == "TruthValue") return ber::Integer(2);
  return ber::OctetString(std::string_view());
}

std::size_t install_module_scalars(MibTree& tree, const mib::Registry& registry,
                                   const mib::CompiledMibModule& module) {
  std::size_t count = 0;
  for (const auto& record : module.records) {
    const auto* a = std::get_if<mib::OidAssignment>(&record);
    if (!a || a->kind != mib::NodeKind::object_type || !a->syntax) continue;
    if (a->syntax->rfind("SEQUENCE OF ", 0) == 0) continue;
    auto access = a->max_access ? mib::parse_access(*a->max_access) : std::nullopt;
    if (!access || *access == mib::Access::not_accessible || *access == mib::Access::accessible_for_notify) continue;
    if (registry.row_schema(*a->syntax)) continue;  // conceptual row
    const mib::OidNode* node = registry.find(module.header.name, a->name);
    if (!node || !node->parent()) continue;
    const auto& parent_syntax = node->parent()->info().syntax;
    if (parent_syntax && registry.row_schema(*parent_syntax)) continue;  // table column
    ber::Value value = default_value(*a->syntax);
    define_scalar(tree, registry, module.header.name + "::" + a->name, [value] { return value; });
    ++count;
  }
  return count;
}

}  // namespace snmp::agent
