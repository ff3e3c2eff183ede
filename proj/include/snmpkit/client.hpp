#pragma once

// SNMP manager sessions: get/get-next/set/bulk/inform/trap, walk and
// table select.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "snmpkit/ber.hpp"
#include "snmpkit/oid.hpp"
#include "snmpkit/pdu.hpp"
#include "snmpkit/smi.hpp"
#include "snmpkit/transport.hpp"
#include "snmpkit/usm.hpp"

namespace snmp {

/// Process-wide defaults for new sessions.
struct Defaults {
  std::uint16_t port = kDefaultPort;
  std::string community = "public";
  Version version = Version::v2c;
};

Defaults defaults();
void set_defaults(const Defaults& d);

struct SessionOptions {
  std::optional<std::uint16_t> port;
  std::optional<Version> version;
  std::optional<std::string> community;
  /// Required for v3.
  std::optional<usm::Credential> credential;
  std::string context_name;
  net::RttConfig rtt;
  /// Resolves names and annotates results; default_registry() when null.
  const mib::Registry* registry = nullptr;
  /// Max-repetitions used by walk and select on v2c/v3.
  std::int32_t bulk_repetitions = 25;
};

/// A variable binding with its name resolved against the session registry.
struct Binding {
  mib::OidRef oid;
  ber::Value value;
};

/// The agent answered with a non-zero error-status.
class SnmpStatusError : public Error {
 public:
  SnmpStatusError(ErrorStatus status, std::int32_t index, std::vector<VarBind> bindings);
  ErrorStatus status() const { return status_; }
  std::int32_t index() const { return index_; }
  const std::vector<VarBind>& bindings() const { return bindings_; }

 private:
  ErrorStatus status_;
  std::int32_t index_;
  std::vector<VarBind> bindings_;
};

class TableRow {
 public:
  TableRow(mib::TableSchema schema, Oid index, std::vector<Binding> cells)
      : schema_(std::move(schema)), index_(std::move(index)), cells_(std::move(cells)) {}

  const mib::TableSchema& schema() const { return schema_; }
  const Oid& index() const { return index_; }
  /// (column instance, value) in column order. Missing cells carry
  /// noSuchInstance/noSuchObject markers.
  const std::vector<Binding>& plain_value() const { return cells_; }
  /// Cell by column name or column OID. Throws ArgumentError if unknown.
  const ber::Value& value_by_column(const mib::OidSpec& column) const;

 private:
  mib::TableSchema schema_;
  Oid index_;
  std::vector<Binding> cells_;
};

/// One conversation with one agent. Not safe for concurrent use; separate
/// sessions are independent.
class Session {
 public:
  Session(const std::string& host, SessionOptions options = {});
  Session(std::unique_ptr<net::Transport> transport, SessionOptions options = {});
  ~Session();
  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;

  /// Idempotent; later requests throw ClosedError.
  void close();
  bool is_open() const;

  Version version() const;
  const mib::Registry& registry() const;

  /// One request/response cycle (plus v3 discovery when needed).
  std::vector<Binding> request(PduType type, const std::vector<BindingSpec>& bindings,
                               std::int32_t non_repeaters = 0, std::int32_t max_repetitions = 0);

  ber::Value get(const BindingSpec& oid);
  std::vector<ber::Value> get(const std::vector<BindingSpec>& oids);
  std::vector<Binding> get_next(const std::vector<BindingSpec>& oids);
  std::vector<Binding> set(const std::vector<BindingSpec>& pairs);
  std::vector<Binding> bulk(std::int32_t non_repeaters, std::int32_t max_repetitions,
                            const std::vector<BindingSpec>& oids);
  std::vector<Binding> inform(const std::vector<BindingSpec>& bindings);
  /// Fire-and-forget; v1 sessions only.
  void trap_v1(const mib::OidSpec& enterprise, std::int32_t generic_trap, std::int32_t specific_trap,
               const std::vector<BindingSpec>& bindings = {});

  /// Every binding under `subtree`, in lexicographic order.
  std::vector<Binding> walk(const mib::OidSpec& subtree);
  std::vector<TableRow> select(std::string_view table_name);

  /// Request/response exchanges performed, including discovery.
  std::size_t exchanges() const;
  const net::ExchangeStats& last_exchange() const;
  net::RttEstimator& estimator();
  /// Engine state of a v3 session.
  const usm::EngineState& engine() const;
  std::size_t discoveries() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Opens a session, runs `body`, and closes it even if `body` throws.
template <typename F>
auto with_open_session(const std::string& host, const SessionOptions& options, F&& body) {
  Session session(host, options);
  return std::forward<F>(body)(session);
}

/// Host-string shorthands: each call runs in a temporary default session.
ber::Value get(const std::string& host, const BindingSpec& oid);
std::vector<ber::Value> get(const std::string& host, const std::vector<BindingSpec>& oids);
std::vector<Binding> walk(const std::string& host, const mib::OidSpec& subtree);
std::vector<TableRow> select(std::string_view table_name, const std::string& host);

}  // namespace snmp
