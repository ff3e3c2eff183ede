#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace snmp {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Object identifier as a plain list of arcs, compared lexicographically.
using Oid = std::vector<std::uint32_t>;

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline std::string to_string(ByteView b) { return std::string(b.begin(), b.end()); }

/// Lower-case hex, no separators.
std::string to_hex(ByteView b);

/// Accepts hex digits with optional whitespace or ':' separators.
Bytes from_hex(std::string_view hex);

/// Dotted decimal form, e.g. "1.3.6.1".
std::string to_dotted(const Oid& oid);

inline bool starts_with(const Oid& oid, const Oid& prefix) {
  return oid.size() >= prefix.size() &&
         std::equal(prefix.begin(), prefix.end(), oid.begin());
}

}  // namespace snmp
