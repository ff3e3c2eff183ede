#include "snmpkit/bytes.hpp"

#include <cctype>

#include "snmpkit/error.hpp"

namespace snmp {

std::string to_hex(ByteView b) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto byte : b) {
    out.push_back(kDigits[byte >> 4]);
    out.push_back(kDigits[byte & 0x0f]);
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  Bytes out;
  int pending = -1;
  for (char c : hex) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == ':') continue;
    int nibble;
    if (c >= '0' && c <= '9')
      nibble = c - '0';
    else if (c >= 'a' && c <= 'f')
      nibble = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F')
      nibble = c - 'A' + 10;
    else
      throw ArgumentError("invalid hex digit '" + std::string(1, c) + "'");
    if (pending < 0) {
      pending = nibble;
    } else {
      out.push_back(static_cast<std::uint8_t>((pending << 4) | nibble));
      pending = -1;
    }
  }
  if (pending >= 0) throw ArgumentError("odd number of hex digits");
  return out;
}

std::string to_dotted(const Oid& oid) {
  std::string out;
  for (std::size_t i = 0; i < oid.size(); ++i) {
    if (i) out.push_back('.');
    out += std::to_string(oid[i]);
  }
  return out;
}

}  // namespace snmp
