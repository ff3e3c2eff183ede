#pragma once

// Deterministic in-process network: a virtual clock, a lossy datagram channel
// between a client transport and a responder, and a scripted v3 engine.

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "snmpkit/bytes.hpp"
#include "snmpkit/pdu.hpp"
#include "snmpkit/transport.hpp"
#include "snmpkit/usm.hpp"

namespace snmp::harness {

class VirtualClock : public net::Clock {
 public:
  explicit VirtualClock(double start = 0) : now_(start) {}
  double now() override { return now_; }
  void advance(double seconds) { now_ += seconds; }
  void advance_to(double t) {
    if (t > now_) now_ = t;
  }

 private:
  double now_;
};

/// Agent side of the channel: a request datagram in, an optional reply out.
using Responder = std::function<std::optional<Bytes>(ByteView request)>;

struct ChannelConfig {
  /// 1-based ordinals of client datagrams to drop.
  std::set<std::size_t> drop_requests;
  /// 1-based ordinals of responder datagrams to drop.
  std::set<std::size_t> drop_responses;
  /// Independent loss probability per datagram, drawn from a seeded PRNG.
  double loss = 0;
  std::uint64_t seed = 1;
  /// One-way delays in seconds. `delay` overrides both when set.
  double request_delay = 0;
  double response_delay = 0;
  std::function<double(std::size_t ordinal)> delay;
};

struct ChannelCounters {
  std::size_t client_sends = 0;
  std::size_t agent_receipts = 0;
  std::size_t agent_sends = 0;
  std::size_t client_receipts = 0;
  std::size_t request_drops = 0;
  std::size_t response_drops = 0;
  /// Datagrams that crossed the wire in either direction, dropped or not.
  std::size_t packets() const { return client_sends + agent_sends; }
};

struct TranscriptEntry {
  double time = 0;
  bool from_client = true;
  bool dropped = false;
  Bytes bytes;
  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

class FakeEndpoint;

/// Single-threaded, event-stepped channel. With no loss and no delay,
/// delivery is FIFO and exact.
class FakeChannel {
 public:
  FakeChannel(VirtualClock& clock, Responder responder, ChannelConfig config = {});

  /// A client transport attached to this channel.
  std::unique_ptr<FakeEndpoint> endpoint();

  /// Queues a datagram for the client at virtual time `at`, bypassing the
  /// responder (e.g. a stale reply).
  void inject(Bytes datagram, double at);

  const ChannelCounters& counters() const { return counters_; }
  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }
  void reset_counters() { counters_ = {}; }
  ChannelConfig& config() { return config_; }
  VirtualClock& clock() { return clock_; }

 private:
  friend class FakeEndpoint;

  struct Pending {
    double at;
    std::uint64_t seq;
    Bytes bytes;
  };

  void client_send(ByteView payload);
  std::optional<Bytes> client_receive(double deadline);
  bool lose(bool from_client, std::size_t ordinal);
  double delay_for(bool from_client, std::size_t ordinal);

  VirtualClock& clock_;
  Responder responder_;
  ChannelConfig config_;
  std::mt19937_64 rng_;
  std::deque<Pending> inbox_;  // sorted by (at, seq)
  std::uint64_t seq_ = 0;
  ChannelCounters counters_;
  std::vector<TranscriptEntry> transcript_;
};

class FakeEndpoint : public net::Transport {
 public:
  explicit FakeEndpoint(FakeChannel& channel) : channel_(channel) {}
  void send(ByteView payload) override;
  std::optional<Bytes> receive(double deadline) override;
  void close() override { open_ = false; }
  bool is_open() const override { return open_; }
  net::Clock& clock() override { return channel_.clock(); }
  /// Every payload passed to send(), in order.
  const std::vector<Bytes>& sent() const { return sent_; }

 private:
  FakeChannel& channel_;
  bool open_ = true;
  std::vector<Bytes> sent_;
};

/// Authoritative SNMPv3 engine for one user. Unknown-engine requests get a
/// usmStatsUnknownEngineIDs Report; authenticated requests are answered by
/// `handler` under the same security level.
class V3Responder {
 public:
  using Handler = std::function<Pdu(const Pdu& request)>;

  V3Responder(net::Clock& clock, Bytes engine_id, usm::Credential user, Handler handler,
              std::int32_t boots = 1, std::int32_t time = 0);

  std::optional<Bytes> operator()(ByteView request);
  Responder responder() {
    return [this](ByteView b) { return (*this)(b); };
  }

  std::size_t reports_sent() const { return reports_; }
  std::size_t responses_sent() const { return responses_; }
  std::size_t auth_failures() const { return auth_failures_; }
  /// Simulates a reboot: boots increments, time restarts at zero.
  void reboot();
  const usm::EngineState& engine() const { return engine_; }

 private:
  Bytes report(const V3Message& request, std::int32_t request_id, const Oid& counter, std::uint32_t count,
               bool authenticated);

  net::Clock& clock_;
  usm::Credential user_;
  Handler handler_;
  usm::EngineState engine_;
  std::size_t reports_ = 0;
  std::size_t responses_ = 0;
  std::size_t auth_failures_ = 0;
  std::uint32_t unknown_engine_ids_ = 0;
  std::uint32_t not_in_time_windows_ = 0;
  std::uint32_t wrong_digests_ = 0;
};

}  // namespace snmp::harness
