#include "snmpkit/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/eventfd.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>

namespace snmp::net {

namespace {

std::string errno_text(const std::string& what) { return what + ": " + std::strerror(errno); }

struct AddrInfo {
  addrinfo* head = nullptr;
  ~AddrInfo() {
    if (head) freeaddrinfo(head);
  }
};

void resolve(const std::string& host, std::uint16_t port, int flags, AddrInfo& out) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_DGRAM;
  hints.ai_flags = flags;
  std::string service = std::to_string(port);
  int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints, &out.head);
  if (rc != 0) throw NetworkError("cannot resolve " + host + ": " + gai_strerror(rc));
}

// Waits for `fd` to become readable. Returns false on timeout; throws
// ClosedError if the wake descriptor fired.
bool wait_readable(int fd, int wake_fd, double timeout) {
  pollfd fds[2] = {{fd, POLLIN, 0}, {wake_fd, POLLIN, 0}};
  int ms = timeout < 0 ? -1 : static_cast<int>(std::ceil(timeout * 1000.0));
  for (;;) {
    int rc = poll(fds, 2, ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw NetworkError(errno_text("poll"));
    }
    if (fds[1].revents) throw ClosedError();
    return rc > 0 && (fds[0].revents & (POLLIN | POLLERR));
  }
}

std::uint16_t socket_port(int fd) {
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  if (getsockname(fd, reinterpret_cast<sockaddr*>(&ss), &len) != 0) return 0;
  if (ss.ss_family == AF_INET) return ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
  if (ss.ss_family == AF_INET6) return ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port);
  return 0;
}

std::string format_address(const sockaddr_storage& ss) {
  char host[INET6_ADDRSTRLEN] = {};
  if (ss.ss_family == AF_INET) {
    auto* in = reinterpret_cast<const sockaddr_in*>(&ss);
    inet_ntop(AF_INET, &in->sin_addr, host, sizeof host);
    return std::string(host) + ":" + std::to_string(ntohs(in->sin_port));
  }
  if (ss.ss_family == AF_INET6) {
    auto* in = reinterpret_cast<const sockaddr_in6*>(&ss);
    inet_ntop(AF_INET6, &in->sin6_addr, host, sizeof host);
    return "[" + std::string(host) + "]:" + std::to_string(ntohs(in->sin6_port));
  }
  return "?";
}

void signal_close(int wake_fd) {
  std::uint64_t one = 1;
  [[maybe_unused]] auto n = ::write(wake_fd, &one, sizeof one);
}

}  // namespace

double SteadyClock::now() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

SteadyClock& SteadyClock::instance() {
  static SteadyClock clock;
  return clock;
}

TimeoutError::TimeoutError(int attempts, double waited)
    : NetworkError("no response after " + std::to_string(attempts) + " attempts"),
      attempts_(attempts),
      waited_(waited) {}

UdpEndpoint::UdpEndpoint(const std::string& host, std::uint16_t port, Clock& clock) : clock_(clock) {
  AddrInfo ai;
  resolve(host, port, 0, ai);
  std::string last_error = "no usable address";
  for (addrinfo* p = ai.head; p; p = p->ai_next) {
    int fd = ::socket(p->ai_family, p->ai_socktype | SOCK_CLOEXEC, p->ai_protocol);
    if (fd < 0) {
      last_error = errno_text("socket");
      continue;
    }
    if (::connect(fd, p->ai_addr, p->ai_addrlen) != 0) {
      last_error = errno_text("connect");
      ::close(fd);
      continue;
    }
    fd_ = fd;
    break;
  }
  if (fd_ < 0) throw NetworkError(host + ": " + last_error);
  wake_fd_ = ::eventfd(0, EFD_CLOEXEC | EFD_NONBLOCK);
  if (wake_fd_ < 0) {
    ::close(fd_);
    throw NetworkError(errno_text("eventfd"));
  }
  open_ = true;
}

UdpEndpoint::~UdpEndpoint() {
  close();
  if (fd_ >= 0) ::close(fd_);
  if (wake_fd_ >= 0) ::close(wake_fd_);
}

void UdpEndpoint::send(ByteView payload) {
  if (!open_) throw ClosedError();
  if (payload.size() > kMaxDatagram) throw ArgumentError("datagram exceeds 65507 bytes");
  for (;;) {
    ssize_t n = ::send(fd_, payload.data(), payload.size(), 0);
    if (n >= 0) return;
    // A previous datagram's ICMP port-unreachable surfaces here; not fatal.
    if (errno == EINTR || errno == ECONNREFUSED) continue;
    throw NetworkError(errno_text("send"));
  }
}

std::optional<Bytes> UdpEndpoint::receive(double deadline) {
  if (!open_) throw ClosedError();
  Bytes buffer(kMaxDatagram + 1);
  for (;;) {
    double remaining = deadline - clock_.now();
    if (remaining <= 0) return std::nullopt;
    if (!wait_readable(fd_, wake_fd_, remaining)) continue;
    ssize_t n = ::recv(fd_, buffer.data(), buffer.size(), MSG_DONTWAIT);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN || errno == ECONNREFUSED) continue;
      throw NetworkError(errno_text("recv"));
    }
    buffer.resize(static_cast<std::size_t>(n));
    return buffer;
  }
}

void UdpEndpoint::close() {
  std::lock_guard lock(close_mutex_);
  if (!open_.exchange(false)) return;
  signal_close(wake_fd_);
}

std::uint16_t UdpEndpoint::local_port() const { return socket_port(fd_); }

std::string PeerAddress::to_string() const { return format_address(storage); }

UdpListener::UdpListener(const std::string& address, std::uint16_t port) {
  AddrInfo ai;
  resolve(address, port, AI_PASSIVE, ai);
  std::string last_error = "no usable address";
  for (addrinfo* p = ai.head; p; p = p->ai_next) {
    int fd = ::socket(p->ai_family, p->ai_socktype | SOCK_CLOEXEC, p->ai_protocol);
    if (fd < 0) {
      last_error = errno_text("socket");
      continue;
    }
    if (::bind(fd, p->ai_addr, p->ai_addrlen) != 0) {
      last_error = errno_text("bind " + address + ":" + std::to_string(port));
      ::close(fd);
      continue;
    }
    fd_ = fd;
    break;
  }
  if (fd_ < 0) throw NetworkError(last_error);
  wake_fd_ = ::eventfd(0, EFD_CLOEXEC | EFD_NONBLOCK);
  if (wake_fd_ < 0) {
    ::close(fd_);
    throw NetworkError(errno_text("eventfd"));
  }
  open_ = true;
}

UdpListener::~UdpListener() {
  close();
  if (fd_ >= 0) ::close(fd_);
  if (wake_fd_ >= 0) ::close(wake_fd_);
}

std::optional<Datagram> UdpListener::receive(double timeout) {
  if (!open_) throw ClosedError();
  if (!wait_readable(fd_, wake_fd_, timeout)) return std::nullopt;
  Datagram d;
  d.payload.resize(kMaxDatagram + 1);
  d.from.length = sizeof d.from.storage;
  ssize_t n = ::recvfrom(fd_, d.payload.data(), d.payload.size(), MSG_DONTWAIT,
                         reinterpret_cast<sockaddr*>(&d.from.storage), &d.from.length);
  if (n < 0) {
    if (errno == EINTR || errno == EAGAIN || errno == ECONNREFUSED) return std::nullopt;
    throw NetworkError(errno_text("recvfrom"));
  }
  d.payload.resize(static_cast<std::size_t>(n));
  return d;
}

void UdpListener::send_to(const PeerAddress& peer, ByteView payload) {
  if (!open_) throw ClosedError();
  ssize_t n = ::sendto(fd_, payload.data(), payload.size(), 0, reinterpret_cast<const sockaddr*>(&peer.storage),
                       peer.length);
  if (n < 0 && errno != ECONNREFUSED) throw NetworkError(errno_text("sendto"));
}

void UdpListener::close() {
  std::lock_guard lock(close_mutex_);
  if (!open_.exchange(false)) return;
  signal_close(wake_fd_);
}

std::uint16_t UdpListener::local_port() const { return socket_port(fd_); }

std::string UdpListener::local_address() const {
  sockaddr_storage ss{};
  socklen_t len = sizeof ss;
  if (getsockname(fd_, reinterpret_cast<sockaddr*>(&ss), &len) != 0) return "?";
  return format_address(ss);
}

RttEstimator::RttEstimator(RttConfig config) : config_(config), rto_(clamp(config.initial_rto)) {
  if (config_.min_rto <= 0 || config_.max_rto < config_.min_rto) throw ArgumentError("invalid rto bounds");
  if (config_.max_retries < 0) throw ArgumentError("negative retry count");
}

double RttEstimator::clamp(double rto) const { return std::clamp(rto, config_.min_rto, config_.max_rto); }

void RttEstimator::update(double sample) {
  if (!(sample > 0)) throw ArgumentError("rtt sample must be positive");
  if (!srtt_) {
    srtt_ = sample;
    rttvar_ = sample / 2;
  } else {
    rttvar_ = 0.75 * rttvar_ + 0.25 * std::fabs(*srtt_ - sample);
    srtt_ = 0.875 * *srtt_ + 0.125 * sample;
  }
  rto_ = clamp(*srtt_ + 4 * rttvar_);
  ++samples_;
}

Bytes exchange(Transport& transport, ByteView payload, RttEstimator& estimator, const Matcher& match,
               ExchangeStats* stats) {
  ExchangeStats local;
  ExchangeStats& st = stats ? *stats : local;
  st = ExchangeStats{};
  Clock& clock = transport.clock();
  const double started = clock.now();
  double timeout = estimator.rto();
  for (int attempt = 0; attempt <= estimator.config().max_retries; ++attempt) {
    transport.send(payload);
    const double sent_at = clock.now();
    ++st.attempts;
    st.timeouts.push_back(timeout);
    const double deadline = sent_at + timeout;
    while (auto reply = transport.receive(deadline)) {
      if (!match(*reply)) {
        ++st.discarded;
        continue;
      }
      if (attempt == 0) {
        // Karn: a sample from a retransmitted exchange is ambiguous.
        double sample = std::max(clock.now() - sent_at, 1e-6);
        estimator.update(sample);
        st.rtt_sample = sample;
      }
      return std::move(*reply);
    }
    timeout = estimator.clamp(timeout * 2);
  }
  throw TimeoutError(st.attempts, clock.now() - started);
}

}  // namespace snmp::net
