#pragma once

// Datagram endpoints and the retransmitting request/response exchange.

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <sys/socket.h>

#include "snmpkit/bytes.hpp"
#include "snmpkit/error.hpp"

namespace snmp::net {

inline constexpr std::size_t kMaxDatagram = 65507;

/// Monotonic seconds. Injectable so timing is testable without sleeping.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual double now() = 0;
};

class SteadyClock : public Clock {
 public:
  double now() override;
  static SteadyClock& instance();
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

/// I/O on a closed endpoint, or the endpoint was closed while waiting.
class ClosedError : public NetworkError {
 public:
  ClosedError() : NetworkError("endpoint closed") {}
};

class TimeoutError : public NetworkError {
 public:
  TimeoutError(int attempts, double waited);
  int attempts() const { return attempts_; }
  double waited() const { return waited_; }

 private:
  int attempts_;
  double waited_;
};

/// A datagram conversation with one peer.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void send(ByteView payload) = 0;
  /// Next datagram from the peer, or nullopt once `deadline` (clock seconds)
  /// passes. Throws ClosedError if the endpoint is or becomes closed.
  virtual std::optional<Bytes> receive(double deadline) = 0;
  /// Idempotent.
  virtual void close() = 0;
  virtual bool is_open() const = 0;
  virtual Clock& clock() = 0;
};

/// UDP socket connected to one peer.
class UdpEndpoint : public Transport {
 public:
  UdpEndpoint(const std::string& host, std::uint16_t port, Clock& clock = SteadyClock::instance());
  ~UdpEndpoint() override;
  UdpEndpoint(const UdpEndpoint&) = delete;
  UdpEndpoint& operator=(const UdpEndpoint&) = delete;

  void send(ByteView payload) override;
  std::optional<Bytes> receive(double deadline) override;
  void close() override;
  bool is_open() const override { return open_.load(); }
  Clock& clock() override { return clock_; }

  std::uint16_t local_port() const;

 private:
  int fd_ = -1;
  int wake_fd_ = -1;
  std::atomic<bool> open_{false};
  std::mutex close_mutex_;
  Clock& clock_;
};

struct PeerAddress {
  sockaddr_storage storage{};
  socklen_t length = 0;
  std::string to_string() const;
};

struct Datagram {
  Bytes payload;
  PeerAddress from;
};

/// UDP socket bound to a local address, serving many peers.
class UdpListener {
 public:
  UdpListener(const std::string& address, std::uint16_t port);
  ~UdpListener();
  UdpListener(const UdpListener&) = delete;
  UdpListener& operator=(const UdpListener&) = delete;

  /// Waits up to `timeout` seconds (negative: forever). nullopt on timeout;
  /// ClosedError once closed.
  std::optional<Datagram> receive(double timeout);
  void send_to(const PeerAddress& peer, ByteView payload);
  void close();
  bool is_open() const { return open_.load(); }
  std::uint16_t local_port() const;
  std::string local_address() const;

 private:
  int fd_ = -1;
  int wake_fd_ = -1;
  std::atomic<bool> open_{false};
  std::mutex close_mutex_;
};

struct RttConfig {
  double min_rto = 2.0;
  double max_rto = 60.0;
  double initial_rto = 2.0;
  int max_retries = 5;
};

/// Jacobson/Karels estimator with alpha = 1/8, beta = 1/4.
class RttEstimator {
 public:
  explicit RttEstimator(RttConfig config = {});

  /// Feeds one RTT sample in seconds; `sample` must be positive.
  void update(double sample);

  double rto() const { return rto_; }
  std::optional<double> srtt() const { return srtt_; }
  double rttvar() const { return rttvar_; }
  std::size_t samples() const { return samples_; }
  const RttConfig& config() const { return config_; }
  double clamp(double rto) const;

 private:
  RttConfig config_;
  std::optional<double> srtt_;
  double rttvar_ = 0;
  double rto_;
  std::size_t samples_ = 0;
};

struct ExchangeStats {
  int attempts = 0;
  /// Timeout used for each attempt, in order.
  std::vector<double> timeouts;
  std::size_t discarded = 0;
  std::optional<double> rtt_sample;
};

using Matcher = std::function<bool(ByteView)>;

/// Sends `payload` and returns the first datagram accepted by `match`,
/// retransmitting the same bytes with doubled timeouts. Only exchanges that
/// needed no retransmission update the estimator.
Bytes exchange(Transport& transport, ByteView payload, RttEstimator& estimator, const Matcher& match,
               ExchangeStats* stats = nullptr);

}  // namespace snmp::net
