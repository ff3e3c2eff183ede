#include "snmpkit/usm.hpp"

#include <openssl/crypto.h>
#include <openssl/des.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <atomic>
#include <cmath>
#include <cstring>
#include <random>

namespace snmp::usm {

namespace {

const EVP_MD* digest(AuthProtocol p) { return p == AuthProtocol::md5 ? EVP_md5() : EVP_sha1(); }

constexpr std::size_t kExpansion = 1048576;

// usmStats counters, 1.3.6.1.6.3.15.1.1.N.0
const Oid kUsmStats{1, 3, 6, 1, 6, 3, 15, 1, 1};

std::atomic<std::uint32_t>& salt_counter() {
  static std::atomic<std::uint32_t> counter{static_cast<std::uint32_t>(std::random_device{}())};
  return counter;
}

void put_u32(std::uint8_t* out, std::uint32_t v) {
  out[0] = static_cast<std::uint8_t>(v >> 24);
  out[1] = static_cast<std::uint8_t>(v >> 16);
  out[2] = static_cast<std::uint8_t>(v >> 8);
  out[3] = static_cast<std::uint8_t>(v);
}

// DES-CBC over whole 8-octet blocks.
Bytes des_cbc(ByteView input, ByteView priv_key, ByteView priv_params, int mode) {
  if (priv_key.size() < 16) throw ArgumentError("DES privacy key needs at least 16 octets");
  if (priv_params.size() != 8) throw ArgumentError("DES privacy parameters must be 8 octets");
  DES_cblock key;
  DES_cblock iv;
  std::memcpy(key, priv_key.data(), 8);
  for (int i = 0; i < 8; ++i) iv[i] = priv_key[8 + i] ^ priv_params[i];
  DES_key_schedule schedule;
  DES_set_key_unchecked(&key, &schedule);
  Bytes out(input.size());
  DES_ncbc_encrypt(input.data(), out.data(), static_cast<long>(input.size()), &schedule, &iv, mode);
  OPENSSL_cleanse(&schedule, sizeof schedule);
  OPENSSL_cleanse(key, sizeof key);
  return out;
}

}  // namespace

std::string_view to_string(AuthProtocol p) { return p == AuthProtocol::md5 ? "md5" : "sha1"; }

std::optional<AuthProtocol> parse_auth_protocol(std::string_view text) {
  if (text == "md5" || text == "MD5") return AuthProtocol::md5;
  if (text == "sha1" || text == "sha" || text == "SHA" || text == "SHA1") return AuthProtocol::sha1;
  return std::nullopt;
}

std::optional<PrivProtocol> parse_priv_protocol(std::string_view text) {
  if (text == "des" || text == "DES") return PrivProtocol::des;
  return std::nullopt;
}

std::string_view to_string(SecurityLevel level) {
  switch (level) {
    case SecurityLevel::no_auth_no_priv: return "noAuthNoPriv";
    case SecurityLevel::auth_no_priv: return "authNoPriv";
    case SecurityLevel::auth_priv: return "authPriv";
  }
  return "?";
}

SecurityLevel Credential::level() const {
  if (priv) return SecurityLevel::auth_priv;
  if (auth) return SecurityLevel::auth_no_priv;
  return SecurityLevel::no_auth_no_priv;
}

void Credential::validate() const {
  if (priv && !auth) throw ArgumentError("privacy requires authentication");
  if (auth && auth->passphrase.empty()) throw ArgumentError("empty authentication passphrase");
  if (priv && priv->passphrase.empty()) throw ArgumentError("empty privacy passphrase");
}

Bytes password_to_key(std::string_view passphrase, AuthProtocol protocol) {
  if (passphrase.empty()) throw ArgumentError("empty passphrase");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, digest(protocol), nullptr);
  std::uint8_t block[64];
  std::size_t index = 0;
  for (std::size_t done = 0; done < kExpansion; done += sizeof block) {
    for (auto& b : block) b = static_cast<std::uint8_t>(passphrase[index++ % passphrase.size()]);
    EVP_DigestUpdate(ctx, block, sizeof block);
  }
  Bytes key(EVP_MD_size(digest(protocol)));
  EVP_DigestFinal_ex(ctx, key.data(), nullptr);
  EVP_MD_CTX_free(ctx);
  return key;
}

Bytes localize_key(ByteView key, ByteView engine_id, AuthProtocol protocol) {
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, digest(protocol), nullptr);
  EVP_DigestUpdate(ctx, key.data(), key.size());
  EVP_DigestUpdate(ctx, engine_id.data(), engine_id.size());
  EVP_DigestUpdate(ctx, key.data(), key.size());
  Bytes out(EVP_MD_size(digest(protocol)));
  EVP_DigestFinal_ex(ctx, out.data(), nullptr);
  EVP_MD_CTX_free(ctx);
  return out;
}

Bytes sign(ByteView message, ByteView key, AuthProtocol protocol) {
  std::uint8_t mac[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  HMAC(digest(protocol), key.data(), static_cast<int>(key.size()), message.data(), message.size(), mac, &len);
  return Bytes(mac, mac + kMacLength);
}

bool verify(ByteView message, ByteView key, AuthProtocol protocol) {
  auto where = find_auth_params(message);
  if (!where || where->second != kMacLength) return false;
  Bytes zeroed(message.begin(), message.end());
  std::fill_n(zeroed.begin() + where->first, kMacLength, 0);
  Bytes expected = sign(zeroed, key, protocol);
  return CRYPTO_memcmp(expected.data(), message.data() + where->first, kMacLength) == 0;
}

Encrypted encrypt(ByteView plaintext, ByteView priv_key, std::int32_t engine_boots, std::uint32_t salt) {
  Encrypted out;
  out.priv_params.resize(8);
  put_u32(out.priv_params.data(), static_cast<std::uint32_t>(engine_boots));
  put_u32(out.priv_params.data() + 4, salt);
  Bytes padded(plaintext.begin(), plaintext.end());
  padded.resize((padded.size() + 7) / 8 * 8, 0);
  out.ciphertext = des_cbc(padded, priv_key, out.priv_params, DES_ENCRYPT);
  return out;
}

Bytes decrypt(ByteView ciphertext, ByteView priv_key, ByteView priv_params) {
  if (ciphertext.size() % 8 != 0) throw AuthError("ciphertext length is not a multiple of 8");
  return des_cbc(ciphertext, priv_key, priv_params, DES_DECRYPT);
}

std::uint32_t next_salt() { return salt_counter().fetch_add(1, std::memory_order_relaxed); }

std::string_view to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::unsupported_sec_level: return "usmStatsUnsupportedSecLevels";
    case ReportKind::not_in_time_window: return "usmStatsNotInTimeWindows";
    case ReportKind::unknown_user_name: return "usmStatsUnknownUserNames";
    case ReportKind::unknown_engine_id: return "usmStatsUnknownEngineIDs";
    case ReportKind::wrong_digest: return "usmStatsWrongDigests";
    case ReportKind::decryption_error: return "usmStatsDecryptionErrors";
    case ReportKind::other: return "other";
  }
  return "?";
}

ReportKind classify_report(const Pdu& report) {
  for (const auto& vb : report.bindings) {
    if (vb.name.size() != kUsmStats.size() + 2 || !starts_with(vb.name, kUsmStats)) continue;
    switch (vb.name[kUsmStats.size()]) {
      case 1: return ReportKind::unsupported_sec_level;
      case 2: return ReportKind::not_in_time_window;
      case 3: return ReportKind::unknown_user_name;
      case 4: return ReportKind::unknown_engine_id;
      case 5: return ReportKind::wrong_digest;
      case 6: return ReportKind::decryption_error;
      default: break;
    }
  }
  return ReportKind::other;
}

std::int32_t EngineState::time_at(double now) const {
  double t = engine_time + std::floor(now - synced_at);
  if (t > 2147483647.0) return 2147483647;
  return static_cast<std::int32_t>(t);
}

void EngineState::update(const Credential& credential, ByteView id, std::int32_t boots, std::int32_t time,
                         double now) {
  bool changed = !std::equal(id.begin(), id.end(), engine_id.begin(), engine_id.end());
  engine_id.assign(id.begin(), id.end());
  engine_boots = boots;
  engine_time = time;
  synced_at = now;
  bool have_keys = !credential.auth || !auth_key.empty();
  if (!changed && have_keys) return;
  auth_key.clear();
  priv_key.clear();
  if (credential.auth) {
    auth_key = localize_key(password_to_key(credential.auth->passphrase, credential.auth->protocol), engine_id,
                            credential.auth->protocol);
  }
  if (credential.priv) {
    // Privacy keys are derived with the authentication hash.
    auto hash = credential.auth ? credential.auth->protocol : AuthProtocol::md5;
    priv_key = localize_key(password_to_key(credential.priv->passphrase, hash), engine_id, hash);
  }
}

V3Message discovery_message(std::int32_t msg_id, std::int32_t request_id) {
  V3Message msg;
  msg.msg_id = msg_id;
  msg.flags = msg_flags::reportable;
  ScopedPdu scoped;
  scoped.pdu.type = PduType::get_request;
  scoped.pdu.request_id = request_id;
  msg.data = std::move(scoped);
  return msg;
}

Bytes secure_outgoing(const Credential& credential, const EngineState& engine, const ScopedPdu& scoped,
                      std::int32_t msg_id, double now, bool reportable) {
  credential.validate();
  V3Message msg;
  msg.msg_id = msg_id;
  msg.flags = reportable ? msg_flags::reportable : 0;
  msg.usm.engine_id = engine.engine_id;
  msg.usm.engine_boots = engine.engine_boots;
  msg.usm.engine_time = engine.time_at(now);
  msg.usm.user_name = credential.user;
  if (credential.auth) {
    if (engine.auth_key.empty()) throw ArgumentError("authentication key not localized; engine unknown");
    msg.flags |= msg_flags::auth;
    msg.usm.auth_params.assign(kMacLength, 0);
  }
  if (credential.priv) {
    msg.flags |= msg_flags::priv;
    auto enc = encrypt(encode_scoped_pdu(scoped), engine.priv_key, engine.engine_boots, next_salt());
    msg.usm.priv_params = std::move(enc.priv_params);
    msg.data = std::move(enc.ciphertext);
  } else {
    msg.data = scoped;
  }
  Bytes wire = encode_message(msg);
  if (credential.auth) {
    auto where = find_auth_params(wire);
    Bytes mac = sign(wire, engine.auth_key, credential.auth->protocol);
    std::copy(mac.begin(), mac.end(), wire.begin() + where->first);
  }
  return wire;
}

Incoming open_incoming(const Credential& credential, EngineState& engine, ByteView bytes, double now) {
  Message decoded = decode_message(bytes, Version::v3);
  Incoming in{std::get<V3Message>(std::move(decoded)), {}, false};
  const V3Message& msg = in.message;

  if (msg.authenticated()) {
    if (!credential.auth) throw AuthError("authenticated response to an unauthenticated request");
    if (msg.usm.user_name != credential.user) throw AuthError("response for a different user");
    if (!std::equal(msg.usm.engine_id.begin(), msg.usm.engine_id.end(), engine.engine_id.begin(),
                    engine.engine_id.end())) {
      throw AuthError("response from an unexpected engine");
    }
    if (!verify(bytes, engine.auth_key, credential.auth->protocol)) throw AuthError("HMAC verification failed");
  }

  if (msg.encrypted()) {
    if (!credential.priv) throw AuthError("encrypted response without a privacy key");
    Bytes plain = decrypt(std::get<Bytes>(msg.data), engine.priv_key, msg.usm.priv_params);
    try {
      in.scoped = decode_scoped_pdu(plain);
    } catch (const Error& e) {
      throw AuthError(std::string("decryption failed: ") + e.what());
    }
  } else {
    in.scoped = std::get<ScopedPdu>(msg.data);
  }

  if (msg.authenticated()) {
    std::int64_t expected = engine.time_at(now);
    if (msg.usm.engine_boots != engine.engine_boots ||
        std::llabs(static_cast<std::int64_t>(msg.usm.engine_time) - expected) > kTimeWindow) {
      in.outside_time_window = true;
    } else {
      engine.engine_time = msg.usm.engine_time;
      engine.synced_at = now;
    }
  }
  return in;
}

}  // namespace snmp::usm
