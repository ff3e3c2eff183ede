#pragma once

// User-based Security Model: key derivation, HMAC-96 authentication,
// DES-CBC privacy and engine state for the non-authoritative side.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "snmpkit/bytes.hpp"
#include "snmpkit/error.hpp"
#include "snmpkit/pdu.hpp"

namespace snmp::usm {

enum class AuthProtocol { md5, sha1 };
enum class PrivProtocol { des };

std::string_view to_string(AuthProtocol p);
std::optional<AuthProtocol> parse_auth_protocol(std::string_view text);
std::optional<PrivProtocol> parse_priv_protocol(std::string_view text);

inline constexpr std::size_t kMacLength = 12;
inline constexpr std::int32_t kTimeWindow = 150;

enum class SecurityLevel { no_auth_no_priv, auth_no_priv, auth_priv };
std::string_view to_string(SecurityLevel level);

struct Credential {
  struct Auth {
    AuthProtocol protocol = AuthProtocol::md5;
    std::string passphrase;
  };
  struct Priv {
    PrivProtocol protocol = PrivProtocol::des;
    std::string passphrase;
  };

  std::string user;
  std::optional<Auth> auth;
  std::optional<Priv> priv;

  SecurityLevel level() const;
  /// Throws ArgumentError when privacy is requested without authentication.
  void validate() const;
};

/// Incoming message failed HMAC verification or could not be decrypted.
class AuthError : public Error {
 public:
  using Error::Error;
};

/// The peer answered with something USM cannot use (e.g. a Report without
/// a usmStats binding).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

Bytes password_to_key(std::string_view passphrase, AuthProtocol protocol);
Bytes localize_key(ByteView key, ByteView engine_id, AuthProtocol protocol);

/// HMAC over `message` (auth params already zeroed), truncated to 12 octets.
Bytes sign(ByteView message, ByteView key, AuthProtocol protocol);
/// Recomputes the MAC of an encoded v3 message with its auth params zeroed.
bool verify(ByteView message, ByteView key, AuthProtocol protocol);

struct Encrypted {
  Bytes ciphertext;
  Bytes priv_params;  // the 8-octet salt
};

/// DES-CBC. The plaintext is zero-padded to a multiple of 8 octets.
Encrypted encrypt(ByteView plaintext, ByteView priv_key, std::int32_t engine_boots, std::uint32_t salt_counter);
Bytes decrypt(ByteView ciphertext, ByteView priv_key, ByteView priv_params);

/// Process-wide salt counter, randomly seeded, incremented per message.
std::uint32_t next_salt();

/// usmStats counters reported by an authoritative engine.
enum class ReportKind {
  unsupported_sec_level,
  not_in_time_window,
  unknown_user_name,
  unknown_engine_id,
  wrong_digest,
  decryption_error,
  other,
};

std::string_view to_string(ReportKind kind);
ReportKind classify_report(const Pdu& report);

/// What the non-authoritative side knows about one authoritative engine.
struct EngineState {
  Bytes engine_id;
  std::int32_t engine_boots = 0;
  std::int32_t engine_time = 0;
  /// Local clock reading (seconds) when engine_time was last synchronized.
  double synced_at = 0;
  Bytes auth_key;
  Bytes priv_key;

  bool known() const { return !engine_id.empty(); }
  /// engine_time extrapolated by the local clock.
  std::int32_t time_at(double now) const;

  /// Records engine identity and timing, relocalizing keys if the id changed.
  void update(const Credential& credential, ByteView engine_id, std::int32_t boots, std::int32_t time, double now);
};

/// Engine-discovery request: noAuthNoPriv, empty engine id, reportable.
V3Message discovery_message(std::int32_t msg_id, std::int32_t request_id);

/// Builds, encrypts and signs an outgoing message for `credential`.
Bytes secure_outgoing(const Credential& credential, const EngineState& engine, const ScopedPdu& scoped,
                      std::int32_t msg_id, double now, bool reportable = true);

struct Incoming {
  V3Message message;
  ScopedPdu scoped;
  /// Authenticated message whose boots/time fell outside the 150 s window.
  bool outside_time_window = false;
};

/// Verifies, decrypts and time-checks an incoming message. Throws AuthError
/// on MAC or decryption failure. Unauthenticated Reports are returned as is.
Incoming open_incoming(const Credential& credential, EngineState& engine, ByteView bytes, double now);

}  // namespace snmp::usm
