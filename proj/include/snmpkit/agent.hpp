#pragma once

// SNMPv1/v2c agent: a tree of variable handlers, request dispatch, and a
// UDP service loop.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "snmpkit/ber.hpp"
#include "snmpkit/oid.hpp"
#include "snmpkit/pdu.hpp"
#include "snmpkit/smi.hpp"
#include "snmpkit/transport.hpp"

namespace snmp::agent {

inline constexpr std::uint16_t kDefaultAgentPort = 8161;

/// Instances below a handler's base OID.
///   count(N): instances 1..N; count(0) is the scalar instance 0
///   list({a, b, ...}): single-arc instances
///   tuples({{a, b}, ...}): multi-arc instances
class ChildSpec {
 public:
  ChildSpec(std::uint32_t n) : count_(n) {}
  static ChildSpec count(std::uint32_t n) { return ChildSpec(n); }
  static ChildSpec list(std::vector<std::uint32_t> arcs);
  static ChildSpec tuples(std::vector<Oid> instances);

  /// Instance suffixes in spec order, duplicates removed.
  std::vector<Oid> expand() const;

 private:
  ChildSpec() = default;
  std::optional<std::uint32_t> count_;
  std::vector<Oid> instances_;
};

struct AgentConfig {
  std::string address = "0.0.0.0";
  std::uint16_t port = kDefaultAgentPort;
  std::string community = "public";
  std::size_t queue_limit = 64;
};

class AgentContext {
 public:
  explicit AgentContext(AgentConfig config = {}, net::Clock& clock = net::SteadyClock::instance());

  const AgentConfig& config() const { return config_; }
  /// Hundredths of a second since the context was created.
  std::uint32_t uptime_ticks() const;

  std::atomic<std::uint64_t> in_pkts{0};
  std::atomic<std::uint64_t> out_pkts{0};
  std::atomic<std::uint64_t> in_bad_versions{0};
  std::atomic<std::uint64_t> in_bad_community_names{0};
  std::atomic<std::uint64_t> in_asn_parse_errs{0};
  std::atomic<std::uint64_t> silent_drops{0};

 private:
  AgentConfig config_;
  net::Clock& clock_;
  double start_;
};

/// Variable handler attached at a base OID.
struct Handler {
  /// Instance set, queried on demand during GetNext/GetBulk.
  std::function<ChildSpec(AgentContext&)> children;
  /// Value of one instance (the arcs after the base), or nullopt if absent.
  std::function<std::optional<ber::Value>(AgentContext&, const Oid&)> value;
  /// Writable variables only. Returns the error-status for the assignment.
  std::function<ErrorStatus(AgentContext&, const Oid&, const ber::Value&)> set;
};

using HandlerMap = std::map<Oid, Handler>;

/// Registered handlers. Updates are copy-on-write, so a request dispatches
/// against one consistent snapshot even while registrations change.
class MibTree {
 public:
  MibTree();

  /// Replaces any handler at the same base. A base nested under (or above)
  /// another registered base is an ArgumentError.
  void register_variable(const mib::OidRef& base, Handler handler);
  void register_variable(const Oid& base, Handler handler);
  bool unregister_variable(const Oid& base);

  std::shared_ptr<const HandlerMap> snapshot() const;

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const HandlerMap> handlers_;
};

using Supplier = std::function<ber::Value()>;

/// Scalar at `name`: instance 0, value recomputed on every query.
void define_scalar(MibTree& tree, const mib::Registry& registry, std::string_view name, Supplier supplier);

/// Table column at `name` with instances from `children`.
void define_table_column(MibTree& tree, const mib::Registry& registry, std::string_view name,
                         std::function<ChildSpec(AgentContext&)> children,
                         std::function<std::optional<ber::Value>(AgentContext&, const Oid&)> value);

/// Every (instance OID, value) the tree currently exposes, in order.
std::vector<VarBind> enumerate(const HandlerMap& handlers, AgentContext& ctx, Version version);

/// Builds the Response for a Get, GetNext, GetBulk or Set request.
Pdu dispatch(const HandlerMap& handlers, const Pdu& request, Version version, AgentContext& ctx);

class Agent {
 public:
  explicit Agent(AgentConfig config = {}, net::Clock& clock = net::SteadyClock::instance());

  MibTree& tree() { return tree_; }
  AgentContext& context() { return ctx_; }
  const AgentConfig& config() const { return ctx_.config(); }

  /// Processes one request datagram. Returns nothing for datagrams that are
  /// dropped (bad community, unparseable, unsupported version or PDU).
  std::optional<Bytes> handle_packet(ByteView datagram);

 private:
  MibTree tree_;
  AgentContext ctx_;
  std::mutex dispatch_mutex_;
};

/// Background UDP service for an Agent: a receiver thread feeding a bounded
/// queue (overflow is dropped) and one dispatch worker.
class Service {
 public:
  /// Binds immediately; throws NetworkError if the port is unavailable.
  explicit Service(Agent& agent);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Idempotent.
  void stop();
  bool running() const { return running_.load(); }
  std::uint16_t port() const { return listener_.local_port(); }
  std::string address() const { return listener_.local_address(); }

 private:
  void receive_loop();
  void work_loop();

  Agent& agent_;
  net::UdpListener listener_;
  std::atomic<bool> running_{true};
  std::mutex queue_mutex_;
  std::condition_variable queue_cv_;
  std::deque<net::Datagram> queue_;
  std::mutex stop_mutex_;
  std::thread receiver_;
  std::thread worker_;
};

std::unique_ptr<Service> enable_service(Agent& agent);
void disable_service(std::unique_ptr<Service>& service);

struct SystemInfo {
  std::string descr;  // empty: "<compiler> <version> on <host>"
  std::string contact;
  std::string name;  // empty: host name
  std::string location;
};

/// "<compiler> <version> on <host>".
std::string default_sys_descr();

/// sysDescr..sysServices, the sysOR table and the snmp statistics group.
/// Throws if SNMPv2-MIB is not loaded.
void install_system_group(MibTree& tree, const mib::Registry& registry, AgentContext& ctx, SystemInfo info = {});

/// appSystem scalars and the appFeatureTable. `features` is evaluated on
/// every query; empty uses the built-in list. Throws if LISP-MIB is not loaded.
void install_enterprise_mib(MibTree& tree, const mib::Registry& registry, AgentContext& ctx,
                            std::function<std::vector<std::string>()> features = {});

std::vector<std::string> builtin_features();

/// Zero value of a SYNTAX type name ("Counter32", "DisplayString", ...).
ber::Value default_value(std::string_view syntax);

/// Registers a constant default-valued scalar for every readable scalar
/// OBJECT-TYPE of a loaded module. Returns the number registered.
std::size_t install_module_scalars(MibTree& tree, const mib::Registry& registry,
                                   const mib::CompiledMibModule& module);

}  // namespace snmp::agent
