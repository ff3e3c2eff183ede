#pragma once

// SNMP messages: v1/v2c community messages and v3 USM messages, mapped to
// and from BER.

#include <array>
#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "snmpkit/ber.hpp"
#include "snmpkit/bytes.hpp"
#include "snmpkit/error.hpp"
#include "snmpkit/oid.hpp"

namespace snmp {

enum class Version : std::int32_t { v1 = 0, v2c = 1, v3 = 3 };

std::string_view to_string(Version v);
std::optional<Version> parse_version(std::string_view text);

enum class PduType : std::uint8_t {
  get_request = 0,
  get_next_request = 1,
  response = 2,
  set_request = 3,
  trap_v1 = 4,
  get_bulk_request = 5,
  inform_request = 6,
  snmpv2_trap = 7,
  report = 8,
};

std::string_view to_string(PduType type);

enum class ErrorStatus : std::int32_t {
  no_error = 0,
  too_big = 1,
  no_such_name = 2,
  bad_value = 3,
  read_only = 4,
  gen_err = 5,
  no_access = 6,
  wrong_type = 7,
  wrong_length = 8,
  wrong_encoding = 9,
  wrong_value = 10,
  no_creation = 11,
  inconsistent_value = 12,
  resource_unavailable = 13,
  commit_failed = 14,
  undo_failed = 15,
  authorization_error = 16,
  not_writable = 17,
  inconsistent_name = 18,
};

/// RFC names such as "noSuchName"; numeric text for unknown codes.
std::string to_string(ErrorStatus status);

inline constexpr std::uint16_t kDefaultPort = 161;
inline constexpr std::int32_t kDefaultMaxMessageSize = 65507;
inline constexpr std::int32_t kUsmSecurityModel = 3;

struct VarBind {
  Oid name;
  ber::Value value;  // Null in requests
  friend bool operator==(const VarBind&, const VarBind&) = default;
};

struct TrapV1 {
  Oid enterprise;
  std::array<std::uint8_t, 4> agent_address{};
  std::int32_t generic_trap = 0;
  std::int32_t specific_trap = 0;
  std::uint32_t timestamp = 0;
  friend bool operator==(const TrapV1&, const TrapV1&) = default;
};

struct Pdu {
  PduType type = PduType::get_request;
  std::int32_t request_id = 0;
  /// Non-repeaters in a GetBulk request.
  std::int32_t error_status = 0;
  /// Max-repetitions in a GetBulk request.
  std::int32_t error_index = 0;
  std::vector<VarBind> bindings;
  /// Present only for trap_v1, which has no request-id or error fields.
  std::optional<TrapV1> trap;

  std::int32_t non_repeaters() const { return error_status; }
  std::int32_t max_repetitions() const { return error_index; }

  friend bool operator==(const Pdu&, const Pdu&) = default;
};

struct CommunityMessage {
  Version version = Version::v2c;
  Bytes community;
  Pdu pdu;
  friend bool operator==(const CommunityMessage&, const CommunityMessage&) = default;
};

namespace msg_flags {
inline constexpr std::uint8_t auth = 0x01;
inline constexpr std::uint8_t priv = 0x02;
inline constexpr std::uint8_t reportable = 0x04;
}  // namespace msg_flags

struct UsmParams {
  Bytes engine_id;
  std::int32_t engine_boots = 0;
  std::int32_t engine_time = 0;
  std::string user_name;
  Bytes auth_params;
  Bytes priv_params;
  friend bool operator==(const UsmParams&, const UsmParams&) = default;
};

struct ScopedPdu {
  Bytes context_engine_id;
  std::string context_name;
  Pdu pdu;
  friend bool operator==(const ScopedPdu&, const ScopedPdu&) = default;
};

struct V3Message {
  std::int32_t msg_id = 0;
  std::int32_t max_size = kDefaultMaxMessageSize;
  std::uint8_t flags = 0;
  std::int32_t security_model = kUsmSecurityModel;
  UsmParams usm;
  /// Plaintext scoped PDU, or its ciphertext when the priv flag is set.
  std::variant<ScopedPdu, Bytes> data;

  bool authenticated() const { return flags & msg_flags::auth; }
  bool encrypted() const { return flags & msg_flags::priv; }
  bool reportable() const { return flags & msg_flags::reportable; }

  friend bool operator==(const V3Message&, const V3Message&) = default;
};

using Message = std::variant<CommunityMessage, V3Message>;

/// Malformed message; `path` names the element that failed ("pdu.bindings[1]").
class MessageError : public Error {
 public:
  MessageError(const std::string& path, const std::string& message);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class VersionError : public Error {
 public:
  VersionError(std::int32_t got, Version expected);
  std::int32_t got() const { return got_; }

 private:
  std::int32_t got_;
};

ber::Value pdu_to_value(const Pdu& pdu);
Pdu pdu_from_value(const ber::Value& value, Version version, const std::string& path = "pdu");

Bytes encode_scoped_pdu(const ScopedPdu& scoped);
ScopedPdu decode_scoped_pdu(ByteView bytes);

Bytes encode_usm_params(const UsmParams& params);

Bytes encode_message(const CommunityMessage& msg);
Bytes encode_message(const V3Message& msg);
Bytes encode_message(const Message& msg);

/// Decodes one complete message. With `expected`, a different version is a
/// VersionError; without it any supported version is accepted.
Message decode_message(ByteView bytes, std::optional<Version> expected = std::nullopt);

/// Version field of a message without decoding the rest.
std::optional<std::int32_t> peek_version(ByteView bytes);

/// Byte range of the msgAuthenticationParameters content in an encoded v3
/// message, as (offset, length).
std::optional<std::pair<std::size_t, std::size_t>> find_auth_params(ByteView message);

/// A binding specification: an OID alone (Null value) or an OID with a value.
struct BindingSpec {
  BindingSpec(mib::OidSpec oid) : oid(std::move(oid)) {}
  BindingSpec(const char* oid) : oid(oid) {}
  BindingSpec(mib::OidSpec oid, ber::Value value) : oid(std::move(oid)), value(std::move(value)) {}

  mib::OidSpec oid;
  std::optional<ber::Value> value;
};

/// Builds a request PDU. Empty `bindings` is an ArgumentError.
Pdu make_request_pdu(PduType type, const std::vector<BindingSpec>& bindings, const mib::Registry& registry,
                     std::int32_t request_id);

/// Per-session request-id source: starts at a random positive value and
/// increments, wrapping back to 1.
class RequestIds {
 public:
  RequestIds();
  explicit RequestIds(std::int32_t first);
  std::int32_t next();

 private:
  std::atomic<std::int32_t> next_;
};

}  // namespace snmp
