#include "snmpkit/client.hpp"

#include <algorithm>
#include <mutex>

namespace snmp {

namespace {

// Bindings per Get when select fetches rows.
constexpr std::size_t kSelectBindingsPerRequest = 64;

std::mutex& defaults_mutex() {
  static std::mutex m;
  return m;
}

Defaults& defaults_storage() {
  static Defaults d;
  return d;
}

bool under(const Oid& name, const Oid& prefix, const Oid& cursor) {
  return starts_with(name, prefix) && name.size() > prefix.size() && cursor < name;
}

}  // namespace

Defaults defaults() {
  std::lock_guard lock(defaults_mutex());
  return defaults_storage();
}

void set_defaults(const Defaults& d) {
  std::lock_guard lock(defaults_mutex());
  defaults_storage() = d;
}

SnmpStatusError::SnmpStatusError(ErrorStatus status, std::int32_t index, std::vector<VarBind> bindings)
    : Error(to_string(status) + " (index " + std::to_string(index) + ")"),
      status_(status),
      index_(index),
      bindings_(std::move(bindings)) {}

const ber::Value& TableRow::value_by_column(const mib::OidSpec& column) const {
  if (const auto* text = std::get_if<std::string>(&column.variant())) {
    std::string_view name = *text;
    if (auto sep = name.find("::"); sep != std::string_view::npos) name = name.substr(sep + 2);
    for (const auto& cell : cells_)
      if (cell.oid.node().name() == name) return cell.value;
  }
  Oid wanted;
  if (const auto* arcs = std::get_if<Oid>(&column.variant())) wanted = *arcs;
  if (const auto* ref = std::get_if<mib::OidRef>(&column.variant())) wanted = ref->number_list();
  if (!wanted.empty()) {
    for (const auto& cell : cells_) {
      Oid full = cell.oid.number_list();
      if (full == wanted || mib::number_list(cell.oid.node()) == wanted) return cell.value;
    }
  }
  throw ArgumentError("no such column in row");
}

struct Session::Impl {
  std::unique_ptr<net::Transport> transport;
  Version version = Version::v2c;
  Bytes community;
  std::optional<usm::Credential> credential;
  std::string context_name;
  const mib::Registry* registry = nullptr;
  net::RttEstimator estimator;
  RequestIds request_ids;
  RequestIds msg_ids;
  usm::EngineState engine;
  std::size_t exchanges = 0;
  std::size_t discoveries = 0;
  net::ExchangeStats last;
  std::int32_t bulk_repetitions = 25;
  double opened_at = 0;

  explicit Impl(const SessionOptions& o) : estimator(o.rtt) {}

  double now() { return transport->clock().now(); }

  Bytes exchange(ByteView payload, const net::Matcher& match) {
    if (!transport->is_open()) throw net::ClosedError();
    ++exchanges;
    return net::exchange(*transport, payload, estimator, match, &last);
  }

  Bytes v3_exchange(ByteView payload, std::int32_t msg_id) {
    return exchange(payload, [msg_id](ByteView reply) {
      try {
        auto m = decode_message(reply, Version::v3);
        return std::get<V3Message>(m).msg_id == msg_id;
      } catch (const Error&) {
        return false;
      }
    });
  }

  void discover() {
    std::int32_t msg_id = msg_ids.next();
    Bytes wire = encode_message(usm::discovery_message(msg_id, request_ids.next()));
    Bytes reply = v3_exchange(wire, msg_id);
    auto msg = std::get<V3Message>(decode_message(reply, Version::v3));
    const auto* scoped = std::get_if<ScopedPdu>(&msg.data);
    if (!scoped || scoped->pdu.type != PduType::report || usm::classify_report(scoped->pdu) == usm::ReportKind::other)
      throw usm::ProtocolError("discovery answered without a usmStats report");
    if (msg.usm.engine_id.empty()) throw usm::ProtocolError("discovery report carries no engine id");
    engine.update(*credential, msg.usm.engine_id, msg.usm.engine_boots, msg.usm.engine_time, now());
    ++discoveries;
  }

  Pdu v3_roundtrip(const Pdu& pdu) {
    if (!engine.known()) discover();
    for (int attempt = 0;; ++attempt) {
      ScopedPdu scoped{engine.engine_id, context_name, pdu};
      std::int32_t msg_id = msg_ids.next();
      Bytes wire = usm::secure_outgoing(*credential, engine, scoped, msg_id, now());
      Bytes reply = v3_exchange(wire, msg_id);
      usm::Incoming in = usm::open_incoming(*credential, engine, reply, now());
      const bool may_retry = attempt == 0;
      if (in.scoped.pdu.type == PduType::report) {
        auto kind = usm::classify_report(in.scoped.pdu);
        if (kind == usm::ReportKind::not_in_time_window && may_retry && in.message.authenticated()) {
          const auto& p = in.message.usm;
          engine.update(*credential, p.engine_id, p.engine_boots, p.engine_time, now());
          continue;
        }
        if (kind == usm::ReportKind::unknown_engine_id && may_retry) {
          discover();
          continue;
        }
        std::string what = "agent reported " + std::string(usm::to_string(kind));
        if (kind == usm::ReportKind::other) throw usm::ProtocolError(what);
        throw usm::AuthError(what);
      }
      if (in.outside_time_window) {
        if (!may_retry) throw usm::ProtocolError("response outside the time window");
        discover();
        continue;
      }
      if (in.scoped.pdu.request_id != pdu.request_id) throw usm::ProtocolError("response request-id mismatch");
      return in.scoped.pdu;
    }
  }

  Pdu community_roundtrip(const Pdu& pdu) {
    CommunityMessage msg{version, community, pdu};
    const Version v = version;
    const std::int32_t id = pdu.request_id;
    Pdu response;
    exchange(encode_message(msg), [&](ByteView reply) {
      try {
        auto m = std::get<CommunityMessage>(decode_message(reply, v));
        if (m.pdu.type != PduType::response || m.pdu.request_id != id) return false;
        response = std::move(m.pdu);
        return true;
      } catch (const Error&) {
        return false;
      }
    });
    return response;
  }

  std::vector<VarBind> request_raw(PduType type, const std::vector<BindingSpec>& specs, std::int32_t non_repeaters,
                                   std::int32_t max_repetitions) {
    if (!transport->is_open()) throw net::ClosedError();
    if ((type == PduType::get_bulk_request || type == PduType::inform_request) && version == Version::v1)
      throw ArgumentError(std::string(to_string(type)) + " requires SNMPv2c or later");
    Pdu pdu = make_request_pdu(type, specs, *registry, request_ids.next());
    if (type == PduType::get_bulk_request) {
      pdu.error_status = non_repeaters;
      pdu.error_index = max_repetitions;
    }
    Pdu response = version == Version::v3 ? v3_roundtrip(pdu) : community_roundtrip(pdu);
    if (response.error_status != 0)
      throw SnmpStatusError(static_cast<ErrorStatus>(response.error_status), response.error_index,
                            std::move(response.bindings));
    return std::move(response.bindings);
  }

  Binding annotate(VarBind vb) const { return {registry->resolve(mib::OidSpec(vb.name)), std::move(vb.value)}; }

  std::vector<Binding> annotate(std::vector<VarBind> vbs) const {
    std::vector<Binding> out;
    out.reserve(vbs.size());
    for (auto& vb : vbs) out.push_back(annotate(std::move(vb)));
    return out;
  }

  // Successors of `prefix` in order, stopping at the first name outside it.
  std::vector<VarBind> scan(const Oid& prefix) {
    std::vector<VarBind> out;
    Oid cursor = prefix;
    for (;;) {
      std::vector<VarBind> batch;
      try {
        batch = version == Version::v1
                    ? request_raw(PduType::get_next_request, {BindingSpec(cursor)}, 0, 0)
                    : request_raw(PduType::get_bulk_request, {BindingSpec(cursor)}, 0, bulk_repetitions);
      } catch (const SnmpStatusError& e) {
        if (version == Version::v1 && e.status() == ErrorStatus::no_such_name) return out;
        throw;
      }
      if (batch.empty()) return out;
      for (auto& vb : batch) {
        if (vb.value.is<ber::EndOfMibView>() || !under(vb.name, prefix, cursor)) return out;
        cursor = vb.name;
        out.push_back(std::move(vb));
      }
    }
  }
};

Session::Session(const std::string& host, SessionOptions options)
    : Session(std::make_unique<net::UdpEndpoint>(host, options.port.value_or(defaults().port)), options) {}

Session::Session(std::unique_ptr<net::Transport> transport, SessionOptions options)
    : impl_(std::make_unique<Impl>(options)) {
  Defaults d = defaults();
  impl_->version = options.version.value_or(d.version);
  impl_->community = to_bytes(options.community.value_or(d.community));
  impl_->credential = options.credential;
  impl_->context_name = options.context_name;
  impl_->registry = options.registry ? options.registry : &mib::default_registry();
  impl_->bulk_repetitions = options.bulk_repetitions;
  if (impl_->version == Version::v3) {
    if (!impl_->credential || impl_->credential->user.empty())
      throw ArgumentError("SNMPv3 sessions require a user name");
    impl_->credential->validate();
  }
  impl_->transport = std::move(transport);
  impl_->opened_at = impl_->now();
}

Session::~Session() {
  if (impl_) close();
}

Session::Session(Session&&) noexcept = default;
Session& Session::operator=(Session&&) noexcept = default;

void Session::close() {
  if (impl_->transport) impl_->transport->close();
}

bool Session::is_open() const { return impl_->transport && impl_->transport->is_open(); }

Version Session::version() const { return impl_->version; }

const mib::Registry& Session::registry() const { return *impl_->registry; }

std::vector<Binding> Session::request(PduType type, const std::vector<BindingSpec>& bindings,
                                      std::int32_t non_repeaters, std::int32_t max_repetitions) {
  return impl_->annotate(impl_->request_raw(type, bindings, non_repeaters, max_repetitions));
}

ber::Value Session::get(const BindingSpec& oid) { return get(std::vector<BindingSpec>{oid}).front(); }

std::vector<ber::Value> Session::get(const std::vector<BindingSpec>& oids) {
  std::vector<ber::Value> out;
  for (auto& vb : impl_->request_raw(PduType::get_request, oids, 0, 0)) out.push_back(std::move(vb.value));
  return out;
}

std::vector<Binding> Session::get_next(const std::vector<BindingSpec>& oids) {
  return request(PduType::get_next_request, oids);
}

std::vector<Binding> Session::set(const std::vector<BindingSpec>& pairs) {
  for (const auto& p : pairs)
    if (!p.value) throw ArgumentError("set requires a value for every binding");
  return request(PduType::set_request, pairs);
}

std::vector<Binding> Session::bulk(std::int32_t non_repeaters, std::int32_t max_repetitions,
                                   const std::vector<BindingSpec>& oids) {
  if (non_repeaters < 0 || max_repetitions < 0) throw ArgumentError("negative bulk parameters");
  return request(PduType::get_bulk_request, oids, non_repeaters, max_repetitions);
}

std::vector<Binding> Session::inform(const std::vector<BindingSpec>& bindings) {
  return request(PduType::inform_request, bindings);
}

void Session::trap_v1(const mib::OidSpec& enterprise, std::int32_t generic_trap, std::int32_t specific_trap,
                      const std::vector<BindingSpec>& bindings) {
  if (impl_->version != Version::v1) throw ArgumentError("Trap-PDU is only defined in SNMPv1");
  if (!is_open()) throw net::ClosedError();
  Pdu pdu;
  if (!bindings.empty()) pdu = make_request_pdu(PduType::trap_v1, bindings, *impl_->registry, 0);
  pdu.type = PduType::trap_v1;
  TrapV1 trap;
  trap.enterprise = impl_->registry->resolve(enterprise).number_list();
  trap.generic_trap = generic_trap;
  trap.specific_trap = specific_trap;
  trap.timestamp = static_cast<std::uint32_t>((impl_->now() - impl_->opened_at) * 100);
  pdu.trap = trap;
  impl_->transport->send(encode_message(CommunityMessage{Version::v1, impl_->community, std::move(pdu)}));
}

std::vector<Binding> Session::walk(const mib::OidSpec& subtree) {
  Oid root = impl_->registry->resolve(subtree).number_list();
  auto found = impl_->scan(root);
  if (found.empty()) {
    // The root may itself be an instance.
    try {
      auto exact = impl_->request_raw(PduType::get_request, {BindingSpec(root)}, 0, 0);
      for (auto& vb : exact)
        if (!vb.value.is_exception()) found.push_back(std::move(vb));
    } catch (const SnmpStatusError&) {
    }
  }
  return impl_->annotate(std::move(found));
}

std::vector<TableRow> Session::select(std::string_view table_name) {
  mib::TableSchema schema = mib::table_schema(*impl_->registry, table_name);
  std::vector<const mib::OidNode*> readable;
  for (const auto* col : schema.columns)
    if (col->info().max_access.value_or(mib::Access::read_only) != mib::Access::not_accessible)
      readable.push_back(col);
  if (readable.empty()) throw mib::NotATableError(std::string(table_name) + " has no readable columns");

  const Oid probe = mib::number_list(*readable.front());
  std::vector<Oid> indices;
  for (auto& vb : impl_->scan(probe)) indices.emplace_back(vb.name.begin() + probe.size(), vb.name.end());

  // Whole rows are batched into each Get; a tooBig reply halves the batch.
  std::vector<TableRow> rows;
  std::size_t per_request = std::max<std::size_t>(1, kSelectBindingsPerRequest / readable.size());
  std::size_t next = 0;
  while (next < indices.size()) {
    std::size_t count = std::min(per_request, indices.size() - next);
    std::vector<BindingSpec> specs;
    for (std::size_t r = next; r < next + count; ++r)
      for (const auto* col : readable) {
        Oid name = mib::number_list(*col);
        name.insert(name.end(), indices[r].begin(), indices[r].end());
        specs.emplace_back(std::move(name));
      }
    std::vector<Binding> cells;
    try {
      cells = impl_->annotate(impl_->request_raw(PduType::get_request, specs, 0, 0));
    } catch (const SnmpStatusError& e) {
      if (e.status() != ErrorStatus::too_big || count == 1) throw;
      per_request = count / 2;
      continue;
    }
    if (cells.size() != specs.size()) throw usm::ProtocolError("response binding count differs from request");
    for (std::size_t r = 0; r < count; ++r) {
      auto first = cells.begin() + static_cast<std::ptrdiff_t>(r * readable.size());
      rows.emplace_back(schema, indices[next + r],
                        std::vector<Binding>(first, first + static_cast<std::ptrdiff_t>(readable.size())));
    }
    next += count;
  }
  return rows;
}

std::size_t Session::exchanges() const { return impl_->exchanges; }
const net::ExchangeStats& Session::last_exchange() const { return impl_->last; }
net::RttEstimator& Session::estimator() { return impl_->estimator; }
const usm::EngineState& Session::engine() const { return impl_->engine; }
std::size_t Session::discoveries() const { return impl_->discoveries; }

ber::Value get(const std::string& host, const BindingSpec& oid) { return Session(host).get(oid); }

std::vector<ber::Value> get(const std::string& host, const std::vector<BindingSpec>& oids) {
  return Session(host).get(oids);
}

std::vector<Binding> walk(const std::string& host, const mib::OidSpec& subtree) { return Session(host).walk(subtree); }

std::vector<TableRow> select(std::string_view table_name, const std::string& host) {
  return Session(host).select(table_name);
}

}  // namespace snmp
