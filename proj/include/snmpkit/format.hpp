#pragma once

// Net-SNMP style text rendering of bindings and values.

#include <string>
#include <string_view>

#include "snmpkit/ber.hpp"
#include "snmpkit/client.hpp"
#include "snmpkit/oid.hpp"

namespace snmp {

/// "(12345) 0:02:03.45"
std::string format_timeticks(std::uint32_t ticks);

/// Value with its type tag, e.g. "STRING: eth0", "Timeticks: (5) 0:00:00.05".
std::string format_value(const ber::Value& value, const mib::Registry& registry);

/// Value without the type tag, as used in table cells.
std::string format_plain(const ber::Value& value, const mib::Registry& registry);

/// "SNMPv2-MIB::sysDescr.0 = STRING: ..."
std::string format_binding(const Binding& binding, const mib::Registry& registry);

/// Parses a typed value in Net-SNMP set notation: i INTEGER, u Gauge32,
/// c Counter32, C Counter64, t TimeTicks, a IpAddress, o OID, s STRING,
/// x hex STRING, n Null.
ber::Value parse_typed_value(char type, std::string_view text, const mib::Registry& registry);

}  // namespace snmp
