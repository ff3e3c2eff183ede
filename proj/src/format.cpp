#include "snmpkit/format.hpp"

#include <charconv>
#include <cstdio>

namespace snmp {

namespace {

bool printable(const Bytes& b) {
  for (auto c : b) {
    if (c == '\n' || c == '\r' || c == '\t') continue;
    if (c < 0x20 || c > 0x7e) return false;
  }
  return true;
}

std::string hex_spaced(const Bytes& b) {
  std::string out;
  char buf[4];
  for (std::size_t i = 0; i < b.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%02X", b[i]);
    if (i) out += ' ';
    out += buf;
  }
  return out;
}

std::string oid_text(const Oid& arcs, const mib::Registry& registry) {
  if (arcs.empty()) return "0.0";
  return registry.resolve(mib::OidSpec(arcs)).to_string();
}

template <typename T>
T parse_number(std::string_view text) {
  T v{};
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || p != text.data() + text.size())
    throw ArgumentError("invalid number: " + std::string(text));
  return v;
}

}  // namespace

std::string format_timeticks(std::uint32_t ticks) {
  std::uint32_t cs = ticks % 100;
  std::uint32_t s = ticks / 100;
  std::uint32_t days = s / 86400;
  s %= 86400;
  char buf[96];
  std::string day_part;
  if (days == 1) day_part = "1 day, ";
  else if (days > 1) day_part = std::to_string(days) + " days, ";
  std::snprintf(buf, sizeof buf, "(%u) %s%u:%02u:%02u.%02u", ticks, day_part.c_str(), s / 3600, (s / 60) % 60, s % 60,
                cs);
  return buf;
}

std::string format_plain(const ber::Value& value, const mib::Registry& registry) {
  if (auto* v = value.get_if<ber::Integer>()) return v->value.str();
  if (auto* v = value.get_if<ber::OctetString>()) return printable(v->bytes) ? v->text() : hex_spaced(v->bytes);
  if (value.is<ber::Null>()) return "";
  if (auto* v = value.get_if<ber::ObjectId>()) return oid_text(v->arcs, registry);
  if (auto* v = value.get_if<ber::IpAddress>()) {
    const auto& o = v->octets;
    return std::to_string(o[0]) + "." + std::to_string(o[1]) + "." + std::to_string(o[2]) + "." + std::to_string(o[3]);
  }
  if (auto* v = value.get_if<ber::Counter32>()) return std::to_string(v->value);
  if (auto* v = value.get_if<ber::Gauge32>()) return std::to_string(v->value);
  if (auto* v = value.get_if<ber::TimeTicks>()) return format_timeticks(v->value);
  if (auto* v = value.get_if<ber::Opaque>()) return hex_spaced(v->bytes);
  if (auto* v = value.get_if<ber::Counter64>()) return std::to_string(v->value);
  if (value.is<ber::NoSuchObject>()) return "No Such Object available on this agent at this OID";
  if (value.is<ber::NoSuchInstance>()) return "No Such Instance currently exists at this OID";
  if (value.is<ber::EndOfMibView>()) return "No more variables left in this MIB View (It is past the end of the MIB tree)";
  return hex_spaced(ber::encode(value));
}

std::string format_value(const ber::Value& value, const mib::Registry& registry) {
  const std::string plain = format_plain(value, registry);
  if (value.is<ber::Integer>()) return "INTEGER: " + plain;
  if (auto* v = value.get_if<ber::OctetString>()) {
    if (v->bytes.empty()) return "\"\"";
    return (printable(v->bytes) ? "STRING: " : "Hex-STRING: ") + plain;
  }
  if (value.is<ber::Null>()) return "NULL";
  if (value.is<ber::ObjectId>()) return "OID: " + plain;
  if (value.is<ber::IpAddress>()) return "IpAddress: " + plain;
  if (value.is<ber::Counter32>()) return "Counter32: " + plain;
  if (value.is<ber::Gauge32>()) return "Gauge32: " + plain;
  if (value.is<ber::TimeTicks>()) return "Timeticks: " + plain;
  if (value.is<ber::Opaque>()) return "Opaque: " + plain;
  if (value.is<ber::Counter64>()) return "Counter64: " + plain;
  if (value.is_exception()) return plain;
  return "Wrong Type: " + plain;
}

std::string format_binding(const Binding& binding, const mib::Registry& registry) {
  return binding.oid.to_string() + " = " + format_value(binding.value, registry);
}

ber::Value parse_typed_value(char type, std::string_view text, const mib::Registry& registry) {
  switch (type) {
    case 'i': return ber::Integer(parse_number<std::int64_t>(text));
    case 'u': return ber::Gauge32{parse_number<std::uint32_t>(text)};
    case 'c': return ber::Counter32{parse_number<std::uint32_t>(text)};
    case 'C': return ber::Counter64{parse_number<std::uint64_t>(text)};
    case 't': return ber::TimeTicks{parse_number<std::uint32_t>(text)};
    case 's': return ber::OctetString(text);
    case 'x': return ber::OctetString(from_hex(text));
    case 'n': return ber::Null{};
    case 'o': return ber::ObjectId{registry.resolve(mib::OidSpec(std::string(text))).number_list()};
    case 'a': {
      ber::IpAddress ip;
      std::size_t part = 0;
      std::string_view rest = text;
      for (; part < 4; ++part) {
        auto dot = rest.find('.');
        auto piece = rest.substr(0, dot);
        auto n = parse_number<unsigned>(piece);
        if (n > 255) throw ArgumentError("invalid IpAddress: " + std::string(text));
        ip.octets[part] = static_cast<std::uint8_t>(n);
        if (dot == std::string_view::npos) break;
        rest = rest.substr(dot + 1);
      }
      if (part != 3) throw ArgumentError("invalid IpAddress: " + std::string(text));
      return ip;
    }
    default:
      throw ArgumentError(std::string("unknown value type '") + type + "'");
  }
}

}  // namespace snmp
