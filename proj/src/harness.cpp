#include "snmpkit/harness.hpp"

#include <algorithm>
#include <cstdlib>

namespace snmp::harness {

namespace {

const Oid kUnsupportedSecLevels{1, 3, 6, 1, 6, 3, 15, 1, 1, 1, 0};
const Oid kNotInTimeWindows{1, 3, 6, 1, 6, 3, 15, 1, 1, 2, 0};
const Oid kUnknownUserNames{1, 3, 6, 1, 6, 3, 15, 1, 1, 3, 0};
const Oid kUnknownEngineIds{1, 3, 6, 1, 6, 3, 15, 1, 1, 4, 0};
const Oid kWrongDigests{1, 3, 6, 1, 6, 3, 15, 1, 1, 5, 0};
const Oid kDecryptionErrors{1, 3, 6, 1, 6, 3, 15, 1, 1, 6, 0};

// `user` restricted to the security level of an incoming message.
usm::Credential at_level(const usm::Credential& user, const V3Message& msg) {
  usm::Credential c;
  c.user = user.user;
  if (msg.authenticated()) c.auth = user.auth;
  if (msg.encrypted()) c.priv = user.priv;
  return c;
}

}  // namespace

FakeChannel::FakeChannel(VirtualClock& clock, Responder responder, ChannelConfig config)
    : clock_(clock), responder_(std::move(responder)), config_(std::move(config)), rng_(config_.seed) {}

std::unique_ptr<FakeEndpoint> FakeChannel::endpoint() { return std::make_unique<FakeEndpoint>(*this); }

void FakeChannel::inject(Bytes datagram, double at) {
  Pending p{at, seq_++, std::move(datagram)};
  auto pos = std::upper_bound(inbox_.begin(), inbox_.end(), p, [](const Pending& a, const Pending& b) {
    return a.at < b.at || (a.at == b.at && a.seq < b.seq);
  });
  inbox_.insert(pos, std::move(p));
}

bool FakeChannel::lose(bool from_client, std::size_t ordinal) {
  const auto& pattern = from_client ? config_.drop_requests : config_.drop_responses;
  if (pattern.count(ordinal)) return true;
  if (config_.loss <= 0) return false;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < config_.loss;
}

double FakeChannel::delay_for(bool from_client, std::size_t ordinal) {
  if (config_.delay) return config_.delay(ordinal);
  return from_client ? config_.request_delay : config_.response_delay;
}

void FakeChannel::client_send(ByteView payload) {
  const double now = clock_.now();
  std::size_t ordinal = ++counters_.client_sends;
  bool dropped = lose(true, ordinal);
  transcript_.push_back({now, true, dropped, Bytes(payload.begin(), payload.end())});
  if (dropped) {
    ++counters_.request_drops;
    return;
  }
  ++counters_.agent_receipts;
  double arrival = now + delay_for(true, ordinal);
  auto reply = responder_(payload);
  if (!reply) return;
  std::size_t reply_ordinal = ++counters_.agent_sends;
  bool reply_dropped = lose(false, reply_ordinal);
  transcript_.push_back({arrival, false, reply_dropped, *reply});
  if (reply_dropped) {
    ++counters_.response_drops;
    return;
  }
  inject(std::move(*reply), arrival + delay_for(false, reply_ordinal));
}

std::optional<Bytes> FakeChannel::client_receive(double deadline) {
  if (!inbox_.empty() && inbox_.front().at <= deadline) {
    clock_.advance_to(inbox_.front().at);
    Bytes out = std::move(inbox_.front().bytes);
    inbox_.pop_front();
    ++counters_.client_receipts;
    return out;
  }
  clock_.advance_to(deadline);
  return std::nullopt;
}

void FakeEndpoint::send(ByteView payload) {
  if (!open_) throw net::ClosedError();
  sent_.emplace_back(payload.begin(), payload.end());
  channel_.client_send(payload);
}

std::optional<Bytes> FakeEndpoint::receive(double deadline) {
  if (!open_) throw net::ClosedError();
  return channel_.client_receive(deadline);
}

V3Responder::V3Responder(net::Clock& clock, Bytes engine_id, usm::Credential user, Handler handler,
                         std::int32_t boots, std::int32_t time)
    : clock_(clock), user_(std::move(user)), handler_(std::move(handler)) {
  engine_.update(user_, engine_id, boots, time, clock_.now());
}

void V3Responder::reboot() {
  engine_.engine_boots += 1;
  engine_.engine_time = 0;
  engine_.synced_at = clock_.now();
}

Bytes V3Responder::report(const V3Message& request, std::int32_t request_id, const Oid& counter,
                          std::uint32_t count, bool authenticated) {
  ++reports_;
  usm::Credential c;
  c.user = request.usm.user_name;
  if (authenticated) c.auth = user_.auth;
  ScopedPdu scoped;
  scoped.context_engine_id = engine_.engine_id;
  scoped.pdu.type = PduType::report;
  scoped.pdu.request_id = request_id;
  scoped.pdu.bindings = {{counter, ber::Counter32(count)}};
  return usm::secure_outgoing(c, engine_, scoped, request.msg_id, clock_.now(), false);
}

std::optional<Bytes> V3Responder::operator()(ByteView bytes) {
  V3Message msg;
  try {
    msg = std::get<V3Message>(decode_message(bytes, Version::v3));
  } catch (const Error&) {
    return std::nullopt;
  }
  const std::int32_t plain_id = std::holds_alternative<ScopedPdu>(msg.data) ? std::get<ScopedPdu>(msg.data).pdu.request_id : 0;
  const double now = clock_.now();

  if (msg.usm.engine_id != engine_.engine_id)
    return report(msg, plain_id, kUnknownEngineIds, ++unknown_engine_ids_, false);
  if (msg.usm.user_name != user_.user) return report(msg, plain_id, kUnknownUserNames, 1, false);
  if ((msg.authenticated() && !user_.auth) || (msg.encrypted() && !user_.priv))
    return report(msg, plain_id, kUnsupportedSecLevels, 1, false);

  if (msg.authenticated()) {
    if (!usm::verify(bytes, engine_.auth_key, user_.auth->protocol)) {
      ++auth_failures_;
      return report(msg, plain_id, kWrongDigests, ++wrong_digests_, false);
    }
    if (msg.usm.engine_boots != engine_.engine_boots ||
        std::llabs(static_cast<long long>(msg.usm.engine_time) - engine_.time_at(now)) > usm::kTimeWindow) {
      return report(msg, plain_id, kNotInTimeWindows, ++not_in_time_windows_, true);
    }
  }

  ScopedPdu scoped;
  if (msg.encrypted()) {
    try {
      scoped = decode_scoped_pdu(usm::decrypt(std::get<Bytes>(msg.data), engine_.priv_key, msg.usm.priv_params));
    } catch (const Error&) {
      return report(msg, 0, kDecryptionErrors, 1, false);
    }
  } else {
    scoped = std::get<ScopedPdu>(msg.data);
  }

  Pdu reply = handler_(scoped.pdu);
  reply.type = PduType::response;
  reply.request_id = scoped.pdu.request_id;
  ScopedPdu out{engine_.engine_id, scoped.context_name, std::move(reply)};
  ++responses_;
  return usm::secure_outgoing(at_level(user_, msg), engine_, out, msg.msg_id, now, false);
}

}  // namespace snmp::harness
