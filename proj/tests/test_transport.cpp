#include <gtest/gtest.h>

#include <thread>

#include "gen.hpp"
#include "snmpkit/harness.hpp"
#include "snmpkit/transport.hpp"

namespace snmp {
namespace {

using harness::ChannelConfig;
using harness::FakeChannel;
using harness::VirtualClock;

harness::Responder echo() {
  return [](ByteView b) { return std::optional<Bytes>(Bytes(b.begin(), b.end())); };
}

net::Matcher any() {
  return [](ByteView) { return true; };
}

TEST(RttEstimator, JacobsonVectors) {
  net::RttEstimator est(net::RttConfig{0.01, 60, 2, 5});
  EXPECT_DOUBLE_EQ(est.rto(), 2.0);
  const double samples[] = {0.3, 0.5, 0.1, 4.0};
  const double srtt[] = {0.3, 0.325, 0.296875, 0.759765625};
  const double rttvar[] = {0.15, 0.1625, 0.178125, 1.059375};
  const double rto[] = {0.9, 0.975, 1.009375, 4.997265625};
  for (int i = 0; i < 4; ++i) {
    est.update(samples[i]);
    EXPECT_NEAR(*est.srtt(), srtt[i], 1e-12);
    EXPECT_NEAR(est.rttvar(), rttvar[i], 1e-12);
    EXPECT_NEAR(est.rto(), rto[i], 1e-12);
  }
  EXPECT_EQ(est.samples(), 4u);
}

TEST(RttEstimator, DefaultClampsToTwoAndSixty) {
  net::RttEstimator est;
  est.update(0.001);
  EXPECT_DOUBLE_EQ(est.rto(), 2.0);
  est.update(500);
  EXPECT_DOUBLE_EQ(est.rto(), 60.0);
  EXPECT_THROW(est.update(0), ArgumentError);
  EXPECT_THROW(est.update(-1), ArgumentError);
}

TEST(RttEstimator, RtoAlwaysWithinBounds) {
  testgen::Gen g(71);
  for (int run = 0; run < 200; ++run) {
    net::RttEstimator est;
    for (int i = 0; i < 50; ++i) {
      double sample = (g.below(1000000) + 1) / 1000.0;
      est.update(sample);
      ASSERT_GE(est.rto(), 2.0);
      ASSERT_LE(est.rto(), 60.0);
      ASSERT_GE(est.rttvar(), 0.0);
    }
  }
}

TEST(Exchange, ZeroLossRecordsSample) {
  VirtualClock clock;
  FakeChannel channel(clock, echo(), ChannelConfig{.request_delay = 0.05, .response_delay = 0.05});
  auto ep = channel.endpoint();
  net::RttEstimator est;
  net::ExchangeStats stats;
  Bytes reply = net::exchange(*ep, Bytes{1, 2, 3}, est, any(), &stats);
  EXPECT_EQ(reply, (Bytes{1, 2, 3}));
  EXPECT_EQ(stats.attempts, 1);
  ASSERT_TRUE(stats.rtt_sample);
  EXPECT_NEAR(*stats.rtt_sample, 0.1, 1e-9);
  EXPECT_EQ(est.samples(), 1u);
  EXPECT_EQ(channel.counters().client_sends, 1u);
  EXPECT_EQ(channel.counters().client_receipts, 1u);
}

TEST(Exchange, DropFirstRetransmitsIdenticalBytes) {
  VirtualClock clock;
  FakeChannel channel(clock, echo(), ChannelConfig{.drop_requests = {1}});
  auto ep = channel.endpoint();
  net::RttEstimator est;
  net::ExchangeStats stats;
  Bytes payload{0x30, 0x03, 0x02, 0x01, 0x07};
  Bytes reply = net::exchange(*ep, payload, est, any(), &stats);
  EXPECT_EQ(reply, payload);
  ASSERT_EQ(ep->sent().size(), 2u);
  EXPECT_EQ(ep->sent()[0], ep->sent()[1]);
  EXPECT_EQ(stats.attempts, 2);
  EXPECT_EQ(stats.timeouts, (std::vector<double>{2, 4}));
  EXPECT_DOUBLE_EQ(clock.now(), 2.0);
  // Karn: the retransmitted exchange yields no sample.
  EXPECT_FALSE(stats.rtt_sample);
  EXPECT_EQ(est.samples(), 0u);
  EXPECT_EQ(channel.counters().client_sends, 2u);
  EXPECT_EQ(channel.counters().request_drops, 1u);
}

TEST(Exchange, DroppedResponseAlsoSkipsSample) {
  VirtualClock clock;
  FakeChannel channel(clock, echo(), ChannelConfig{.drop_responses = {1}});
  auto ep = channel.endpoint();
  net::RttEstimator est;
  net::ExchangeStats stats;
  net::exchange(*ep, Bytes{9}, est, any(), &stats);
  EXPECT_EQ(stats.attempts, 2);
  EXPECT_EQ(est.samples(), 0u);
  EXPECT_EQ(channel.counters().agent_receipts, 2u);
}

TEST(Exchange, TotalLossTimesOutWithinBounds) {
  VirtualClock clock;
  FakeChannel channel(clock, echo(), ChannelConfig{.loss = 1.0});
  auto ep = channel.endpoint();
  net::RttEstimator est;
  net::ExchangeStats stats;
  try {
    net::exchange(*ep, Bytes{1}, est, any(), &stats);
    FAIL() << "expected timeout";
  } catch (const net::TimeoutError& e) {
    EXPECT_EQ(e.attempts(), 6);
    EXPECT_DOUBLE_EQ(e.waited(), 2 + 4 + 8 + 16 + 32 + 60);
  }
  EXPECT_EQ(stats.timeouts, (std::vector<double>{2, 4, 8, 16, 32, 60}));
  for (double t : stats.timeouts) {
    EXPECT_GE(t, 2.0);
    EXPECT_LE(t, 60.0);
  }
  EXPECT_EQ(channel.counters().client_sends, 6u);
  EXPECT_EQ(channel.counters().agent_receipts, 0u);
}

TEST(Exchange, RetriesFollowConfig) {
  VirtualClock clock;
  FakeChannel channel(clock, echo(), ChannelConfig{.loss = 1.0});
  auto ep = channel.endpoint();
  net::RttEstimator est(net::RttConfig{.max_retries = 1});
  EXPECT_THROW(net::exchange(*ep, Bytes{1}, est, any()), net::TimeoutError);
  EXPECT_EQ(channel.counters().client_sends, 2u);
}

TEST(Exchange, UnmatchedRepliesAreDiscarded) {
  VirtualClock clock;
  FakeChannel channel(clock, echo());
  channel.inject(Bytes{0xEE}, 0);
  auto ep = channel.endpoint();
  net::RttEstimator est;
  net::ExchangeStats stats;
  Bytes reply = net::exchange(*ep, Bytes{1}, est, [](ByteView b) { return b.size() == 1 && b[0] == 1; }, &stats);
  EXPECT_EQ(reply, Bytes{1});
  EXPECT_EQ(stats.discarded, 1u);
  EXPECT_EQ(stats.attempts, 1);
}

TEST(Exchange, LateReplyToFirstAttemptIsAccepted) {
  VirtualClock clock;
  // The first reply arrives after 3 s, during the second attempt's window.
  FakeChannel channel(clock, echo(), ChannelConfig{.delay = [](std::size_t n) { return n == 1 ? 1.5 : 0.0; }});
  auto ep = channel.endpoint();
  net::RttEstimator est;
  net::ExchangeStats stats;
  net::exchange(*ep, Bytes{4}, est, any(), &stats);
  EXPECT_EQ(stats.attempts, 2);
  EXPECT_EQ(est.samples(), 0u);
}

TEST(Harness, CounterConservation) {
  testgen::Gen g(5);
  for (int run = 0; run < 50; ++run) {
    VirtualClock clock;
    FakeChannel channel(clock, echo(), ChannelConfig{.loss = 0.3, .seed = g.u64()});
    auto ep = channel.endpoint();
    net::RttEstimator est;
    for (int i = 0; i < 10; ++i) {
      try {
        net::exchange(*ep, Bytes{static_cast<std::uint8_t>(i)}, est, any());
      } catch (const net::TimeoutError&) {
      }
    }
    const auto& c = channel.counters();
    ASSERT_EQ(c.client_sends, c.agent_receipts + c.request_drops);
    ASSERT_EQ(c.agent_sends, c.agent_receipts);
    ASSERT_LE(c.client_receipts, c.agent_sends - c.response_drops);
  }
}

std::vector<harness::TranscriptEntry> lossy_run(std::uint64_t seed) {
  VirtualClock clock;
  FakeChannel channel(clock, echo(), ChannelConfig{.loss = 0.5, .seed = seed, .request_delay = 0.01});
  auto ep = channel.endpoint();
  net::RttEstimator est;
  for (int i = 0; i < 20; ++i) {
    try {
      net::exchange(*ep, Bytes{static_cast<std::uint8_t>(i)}, est, any());
    } catch (const net::TimeoutError&) {
    }
  }
  return channel.transcript();
}

TEST(Harness, SeededLossIsReproducible) {
  auto a = lossy_run(42);
  auto b = lossy_run(42);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, lossy_run(43));
  std::size_t dropped = 0;
  for (const auto& e : a) dropped += e.dropped;
  EXPECT_GT(dropped, 0u);
}

TEST(Harness, ZeroLossDeliveryIsFifo) {
  VirtualClock clock;
  FakeChannel channel(clock, [](ByteView) { return std::optional<Bytes>(); });
  for (std::uint8_t i = 0; i < 5; ++i) channel.inject(Bytes{i}, 1.0);
  auto ep = channel.endpoint();
  for (std::uint8_t i = 0; i < 5; ++i) {
    auto b = ep->receive(10);
    ASSERT_TRUE(b);
    EXPECT_EQ(*b, Bytes{i});
  }
  EXPECT_FALSE(ep->receive(10));
  EXPECT_DOUBLE_EQ(clock.now(), 10.0);
}

TEST(Harness, ClosedEndpointRejectsSend) {
  VirtualClock clock;
  FakeChannel channel(clock, echo());
  auto ep = channel.endpoint();
  ep->close();
  EXPECT_THROW(ep->send(Bytes{1}), net::ClosedError);
}

TEST(Udp, LoopbackRoundTrip) {
  net::UdpListener listener("127.0.0.1", 0);
  std::thread server([&] {
    auto d = listener.receive(5.0);
    if (d) listener.send_to(d->from, d->payload);
  });
  net::UdpEndpoint ep("127.0.0.1", listener.local_port());
  net::RttEstimator est;
  net::ExchangeStats stats;
  Bytes reply = net::exchange(ep, Bytes{1, 2, 3, 4}, est, any(), &stats);
  server.join();
  EXPECT_EQ(reply, (Bytes{1, 2, 3, 4}));
  EXPECT_EQ(stats.attempts, 1);
  EXPECT_EQ(est.samples(), 1u);
}

TEST(Udp, Ipv6Loopback) {
  std::unique_ptr<net::UdpListener> listener;
  try {
    listener = std::make_unique<net::UdpListener>("::1", 0);
  } catch (const net::NetworkError&) {
    GTEST_SKIP() << "no IPv6 loopback";
  }
  std::thread server([&] {
    auto d = listener->receive(5.0);
    if (d) listener->send_to(d->from, d->payload);
  });
  net::UdpEndpoint ep("::1", listener->local_port());
  net::RttEstimator est;
  EXPECT_EQ(net::exchange(ep, Bytes{7}, est, any()), Bytes{7});
  server.join();
}

TEST(Udp, CloseUnblocksReceive) {
  net::UdpListener listener("127.0.0.1", 0);
  net::UdpEndpoint ep("127.0.0.1", listener.local_port());
  std::thread closer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    ep.close();
  });
  auto start = std::chrono::steady_clock::now();
  try {
    ep.receive(ep.clock().now() + 10);
  } catch (const net::ClosedError&) {
  }
  closer.join();
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
  EXPECT_FALSE(ep.is_open());
  EXPECT_THROW(ep.send(Bytes{1}), net::ClosedError);
}

TEST(Udp, UnresolvableHostIsNetworkError) {
  EXPECT_THROW(net::UdpEndpoint("no-such-host.invalid", 161), net::NetworkError);
}

}  // namespace
}  // namespace snmp
