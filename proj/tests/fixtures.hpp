#pragma once

// Agent fixtures shared by the client tests and the acceptance suite.

#include <memory>
#include <string>

#include "snmpkit/agent.hpp"
#include "snmpkit/client.hpp"
#include "snmpkit/harness.hpp"
#include "support.hpp"

namespace snmp::testsupport {

inline constexpr const char* kSysDescr = "snmpkit test agent";

/// Cell of the two-row ifTable: distinct per (column, row), typed by syntax.
inline ber::Value if_cell(const std::string& syntax, std::uint32_t column, std::uint32_t row) {
  ber::Value zero = agent::default_value(syntax);
  std::uint32_t n = column * 100 + row;
  if (zero.is<ber::Integer>()) return ber::Integer(column == 1 ? row : n);
  if (zero.is<ber::Counter32>()) return ber::Counter32{n};
  if (zero.is<ber::Gauge32>()) return ber::Gauge32{n};
  if (zero.is<ber::TimeTicks>()) return ber::TimeTicks{n};
  if (zero.is<ber::ObjectId>()) return ber::ObjectId{{0, 0}};
  return ber::OctetString("if" + std::to_string(row) + "-c" + std::to_string(column));
}

/// Registers all 22 ifTable columns with rows 1 and 2.
inline void install_if_table(agent::MibTree& tree, const mib::Registry& registry) {
  auto schema = mib::table_schema(registry, "ifTable");
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    const auto* col = schema.columns[i];
    std::string syntax = col->info().syntax.value_or("");
    auto column = static_cast<std::uint32_t>(i + 1);
    agent::define_table_column(
        tree, registry, "IF-MIB::" + *col->name(), [](agent::AgentContext&) { return agent::ChildSpec::list({1, 2}); },
        [syntax, column](agent::AgentContext&, const Oid& rest) -> std::optional<ber::Value> {
          if (rest.size() != 1 || rest[0] < 1 || rest[0] > 2) return std::nullopt;
          return if_cell(syntax, column, rest[0]);
        });
  }
}

/// Registry with the bundled corpus, shared by every fixture.
inline mib::Registry& corpus() {
  static mib::Registry* registry = [] {
    auto* r = new mib::Registry;
    load_corpus(*r);
    return r;
  }();
  return *registry;
}

/// Agent with the system group, the enterprise MIB and a two-row ifTable,
/// reachable through a FakeChannel on a virtual clock.
struct HarnessAgent {
  explicit HarnessAgent(harness::ChannelConfig config = {}, agent::AgentConfig agent_config = {})
      : agent(agent_config, clock),
        channel(clock, [this](ByteView b) { return agent.handle_packet(b); }, std::move(config)) {
    agent::install_system_group(agent.tree(), corpus(), agent.context(), agent::SystemInfo{kSysDescr, "", "", ""});
    agent::install_enterprise_mib(agent.tree(), corpus(), agent.context());
    install_if_table(agent.tree(), corpus());
  }

  Session session(SessionOptions options = {}) {
    options.registry = &corpus();
    return Session(channel.endpoint(), std::move(options));
  }

  harness::VirtualClock clock{1000};
  agent::Agent agent;
  harness::FakeChannel channel;
};

}  // namespace snmp::testsupport
