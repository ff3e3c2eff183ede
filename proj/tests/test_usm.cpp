#include <gtest/gtest.h>

#include <set>

#include "gen.hpp"
#include "snmpkit/usm.hpp"

using namespace snmp;
using namespace snmp::usm;

namespace {

const Bytes kEngine = from_hex("000000000000000000000002");

Bytes pattern_message() {
  Bytes m;
  for (int r = 0; r < 2; ++r)
    for (int i = 0; i < 256; ++i) m.push_back(static_cast<std::uint8_t>(i));
  return m;
}

Credential auth_priv_user() {
  Credential c;
  c.user = "alice";
  c.auth = Credential::Auth{AuthProtocol::md5, "maplesyrup"};
  c.priv = Credential::Priv{PrivProtocol::des, "privpassword"};
  return c;
}

ScopedPdu sample_scoped(std::int32_t request_id) {
  ScopedPdu s;
  s.context_engine_id = kEngine;
  s.pdu.type = PduType::get_request;
  s.pdu.request_id = request_id;
  s.pdu.bindings = {{Oid{1, 3, 6, 1, 2, 1, 1, 1, 0}, ber::Null{}}};
  return s;
}

}  // namespace

TEST(UsmKeys, PasswordToKeyMd5) {
  EXPECT_EQ(to_hex(password_to_key("maplesyrup", AuthProtocol::md5)), "9faf3283884e92834ebc9847d8edd963");
}

TEST(UsmKeys, PasswordToKeySha1) {
  EXPECT_EQ(to_hex(password_to_key("maplesyrup", AuthProtocol::sha1)), "9fb5cc0381497b3793528939ff788d5d79145211");
}

TEST(UsmKeys, SingleCharPassphrase) {
  EXPECT_EQ(to_hex(password_to_key("a", AuthProtocol::md5)), "7202826a7791073fe2787f0c94603278");
}

TEST(UsmKeys, EmptyPassphraseRejected) {
  EXPECT_THROW(password_to_key("", AuthProtocol::md5), ArgumentError);
}

TEST(UsmKeys, LocalizeMd5) {
  Bytes key = password_to_key("maplesyrup", AuthProtocol::md5);
  EXPECT_EQ(to_hex(localize_key(key, kEngine, AuthProtocol::md5)), "526f5eed9fcce26f8964c2930787d82b");
}

TEST(UsmKeys, LocalizeSha1) {
  Bytes key = password_to_key("maplesyrup", AuthProtocol::sha1);
  EXPECT_EQ(to_hex(localize_key(key, kEngine, AuthProtocol::sha1)), "6695febc9288e36282235fc7151f128497b38f3f");
}

TEST(UsmKeys, LocalizeDeterministic) {
  Bytes key = password_to_key("maplesyrup", AuthProtocol::md5);
  EXPECT_EQ(localize_key(key, kEngine, AuthProtocol::md5), localize_key(key, kEngine, AuthProtocol::md5));
}

TEST(UsmAuth, HmacMd5Vector) {
  Bytes key = from_hex("526f5eed9fcce26f8964c2930787d82b");
  Bytes mac = sign(pattern_message(), key, AuthProtocol::md5);
  EXPECT_EQ(mac.size(), 12u);
  EXPECT_EQ(to_hex(mac), "d9ee63f1e8a4c0c25eb4fdc7");
}

TEST(UsmAuth, HmacSha1Vector) {
  Bytes key = from_hex("6695febc9288e36282235fc7151f128497b38f3f");
  Bytes mac = sign(pattern_message(), key, AuthProtocol::sha1);
  EXPECT_EQ(mac.size(), 12u);
  EXPECT_EQ(to_hex(mac), "3c10b5bc3b9d90046c8f87ba");
}

TEST(UsmPriv, DesVector) {
  Bytes key = localize_key(password_to_key("privpassword", AuthProtocol::md5), kEngine, AuthProtocol::md5);
  EXPECT_EQ(to_hex(key), "cf2d07ac2d74c68e2ccb806d97e5c11f");
  Bytes plain;
  for (int i = 0; i < 40; ++i) plain.push_back(static_cast<std::uint8_t>(i));
  auto enc = encrypt(plain, key, 7, 0x01020304);
  EXPECT_EQ(to_hex(enc.priv_params), "0000000701020304");
  EXPECT_EQ(to_hex(enc.ciphertext),
            "404d26def88d6978e9e72896e54576297ecfaed92a04f2adb0cae2e877fda6e7cf69da490a557302");
  EXPECT_EQ(decrypt(enc.ciphertext, key, enc.priv_params), plain);
}

TEST(UsmPriv, ShortKeyRejected) {
  EXPECT_THROW(encrypt(Bytes{1, 2, 3}, Bytes(15, 0xaa), 0, 0), ArgumentError);
}

TEST(UsmPriv, ConsecutiveSaltsDiffer) {
  std::uint32_t a = next_salt();
  std::uint32_t b = next_salt();
  EXPECT_NE(a, b);
  Bytes key(16, 0x11);
  EXPECT_NE(encrypt(Bytes{1}, key, 1, a).priv_params, encrypt(Bytes{1}, key, 1, b).priv_params);
}

TEST(UsmPriv, EncryptDecryptProperty) {
  testgen::Gen g(0x05d1);
  for (int i = 0; i < 300; ++i) {
    Bytes key = g.bytes(40);
    key.resize(std::max<std::size_t>(key.size(), 16), 0x5a);
    Bytes plain = g.bytes(200);
    auto enc = encrypt(plain, key, static_cast<std::int32_t>(g.u32() >> 1), g.u32());
    ASSERT_EQ(enc.ciphertext.size() % 8, 0u);
    ASSERT_GE(enc.ciphertext.size(), plain.size());
    Bytes back = decrypt(enc.ciphertext, key, enc.priv_params);
    back.resize(plain.size());
    ASSERT_EQ(back, plain);
  }
}

TEST(UsmPriv, ScopedPduSurvivesPadding) {
  testgen::Gen g(77);
  Bytes key(16, 0x42);
  for (int i = 0; i < 100; ++i) {
    ScopedPdu s = sample_scoped(static_cast<std::int32_t>(g.u32() >> 1));
    s.context_name = std::string(g.below(9), 'c');
    auto enc = encrypt(encode_scoped_pdu(s), key, 3, g.u32());
    ASSERT_EQ(decode_scoped_pdu(decrypt(enc.ciphertext, key, enc.priv_params)), s);
  }
}

TEST(UsmCredential, PrivWithoutAuthRejected) {
  Credential c;
  c.user = "bob";
  c.priv = Credential::Priv{PrivProtocol::des, "secretpass"};
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(UsmCredential, DefaultsAndLevels) {
  Credential c;
  c.user = "u";
  EXPECT_EQ(c.level(), SecurityLevel::no_auth_no_priv);
  c.auth = Credential::Auth{};
  c.auth->passphrase = "maplesyrup";
  EXPECT_EQ(c.auth->protocol, AuthProtocol::md5);
  EXPECT_EQ(c.level(), SecurityLevel::auth_no_priv);
  c.priv = Credential::Priv{};
  c.priv->passphrase = "x12345678";
  EXPECT_EQ(c.level(), SecurityLevel::auth_priv);
  EXPECT_EQ(parse_auth_protocol("sha"), AuthProtocol::sha1);
  EXPECT_EQ(parse_priv_protocol("aes"), std::nullopt);
}

TEST(UsmEngine, KeysRecomputedOnEngineChange) {
  Credential c = auth_priv_user();
  EngineState e;
  e.update(c, kEngine, 1, 100, 0.0);
  EXPECT_EQ(to_hex(e.auth_key), "526f5eed9fcce26f8964c2930787d82b");
  EXPECT_EQ(to_hex(e.priv_key), "cf2d07ac2d74c68e2ccb806d97e5c11f");
  Bytes before = e.auth_key;
  e.update(c, kEngine, 2, 5, 10.0);
  EXPECT_EQ(e.auth_key, before);
  e.update(c, from_hex("8000000001"), 2, 5, 10.0);
  EXPECT_NE(e.auth_key, before);
  EXPECT_EQ(e.auth_key, localize_key(password_to_key("maplesyrup", AuthProtocol::md5), from_hex("8000000001"),
                                     AuthProtocol::md5));
}

TEST(UsmEngine, TimeExtrapolated) {
  EngineState e;
  e.engine_time = 1000;
  e.synced_at = 50.0;
  EXPECT_EQ(e.time_at(50.0), 1000);
  EXPECT_EQ(e.time_at(80.7), 1030);
}

TEST(UsmMessage, DiscoveryShape) {
  V3Message d = discovery_message(100, 200);
  EXPECT_EQ(d.flags, msg_flags::reportable);
  EXPECT_TRUE(d.usm.engine_id.empty());
  EXPECT_TRUE(d.usm.auth_params.empty());
  EXPECT_EQ(std::get<ScopedPdu>(d.data).pdu.request_id, 200);
  EXPECT_TRUE(std::get<ScopedPdu>(d.data).pdu.bindings.empty());
}

TEST(UsmMessage, ClassifyReport) {
  Pdu r;
  r.type = PduType::report;
  EXPECT_EQ(classify_report(r), ReportKind::other);
  r.bindings = {{Oid{1, 3, 6, 1, 6, 3, 15, 1, 1, 4, 0}, ber::Counter32(1)}};
  EXPECT_EQ(classify_report(r), ReportKind::unknown_engine_id);
  r.bindings = {{Oid{1, 3, 6, 1, 6, 3, 15, 1, 1, 2, 0}, ber::Counter32(1)}};
  EXPECT_EQ(classify_report(r), ReportKind::not_in_time_window);
}

TEST(UsmMessage, SecureRoundTripEachLevel) {
  for (int level = 0; level < 3; ++level) {
    Credential c;
    c.user = "carol";
    if (level >= 1) c.auth = Credential::Auth{AuthProtocol::sha1, "maplesyrup"};
    if (level >= 2) c.priv = Credential::Priv{PrivProtocol::des, "privpassword"};
    EngineState e;
    e.update(c, kEngine, 4, 500, 0.0);
    Bytes wire = secure_outgoing(c, e, sample_scoped(9), 42, 3.0);
    auto msg = std::get<V3Message>(decode_message(wire));
    EXPECT_EQ(msg.authenticated(), level >= 1);
    EXPECT_EQ(msg.encrypted(), level >= 2);
    EXPECT_EQ(msg.usm.auth_params.empty(), level == 0);
    EXPECT_EQ(std::holds_alternative<ScopedPdu>(msg.data), level < 2);
    EXPECT_EQ(msg.usm.engine_time, 503);
    Incoming in = open_incoming(c, e, wire, 3.0);
    EXPECT_EQ(in.scoped, sample_scoped(9));
    EXPECT_FALSE(in.outside_time_window);
  }
}

TEST(UsmMessage, TamperedMessageIsAuthError) {
  Credential c = auth_priv_user();
  EngineState e;
  e.update(c, kEngine, 1, 1, 0.0);
  Bytes wire = secure_outgoing(c, e, sample_scoped(1), 1, 0.0);
  wire.back() ^= 0x01;
  EXPECT_THROW(open_incoming(c, e, wire, 0.0), AuthError);
}

TEST(UsmMessage, WrongKeyIsAuthError) {
  Credential c = auth_priv_user();
  EngineState e;
  e.update(c, kEngine, 1, 1, 0.0);
  Bytes wire = secure_outgoing(c, e, sample_scoped(1), 1, 0.0);
  Credential other = c;
  other.auth->passphrase = "wrongpassword";
  EngineState e2;
  e2.update(other, kEngine, 1, 1, 0.0);
  EXPECT_THROW(open_incoming(other, e2, wire, 0.0), AuthError);
}

TEST(UsmMessage, OutsideTimeWindowFlagged) {
  Credential c = auth_priv_user();
  EngineState sender;
  sender.update(c, kEngine, 1, 1000, 0.0);
  Bytes wire = secure_outgoing(c, sender, sample_scoped(1), 1, 0.0);
  EngineState receiver = sender;
  receiver.engine_time = 1000 + 151;
  EXPECT_TRUE(open_incoming(c, receiver, wire, 0.0).outside_time_window);
  receiver.engine_time = 1000 + 150;
  EXPECT_FALSE(open_incoming(c, receiver, wire, 0.0).outside_time_window);
  receiver.engine_boots = 2;
  receiver.engine_time = 1000;
  EXPECT_TRUE(open_incoming(c, receiver, wire, 0.0).outside_time_window);
}

TEST(UsmProperty, SignVerifyAndBitFlips) {
  testgen::Gen g(0xa17);
  Credential c;
  c.user = "dave";
  c.auth = Credential::Auth{AuthProtocol::md5, "maplesyrup"};
  EngineState e;
  e.update(c, kEngine, 1, 1, 0.0);
  for (int i = 0; i < 60; ++i) {
    c.auth->protocol = g.coin() ? AuthProtocol::md5 : AuthProtocol::sha1;
    e.auth_key.clear();
    e.update(c, kEngine, 1, 1, 0.0);
    ScopedPdu s = sample_scoped(static_cast<std::int32_t>(g.u32() >> 1));
    s.pdu.bindings.push_back({g.oid(), ber::OctetString(g.bytes(40))});
    Bytes wire = secure_outgoing(c, e, s, static_cast<std::int32_t>(g.u32() >> 1), 0.0);
    ASSERT_TRUE(verify(wire, e.auth_key, c.auth->protocol));

    Bytes flipped = wire;
    std::size_t bit = g.below(flipped.size() * 8);
    flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    bool still = false;
    try {
      still = verify(flipped, e.auth_key, c.auth->protocol);
    } catch (const Error&) {
      still = false;
    }
    ASSERT_FALSE(still) << "bit " << bit;

    Bytes key = e.auth_key;
    std::size_t kbit = g.below(key.size() * 8);
    key[kbit / 8] ^= static_cast<std::uint8_t>(1u << (kbit % 8));
    ASSERT_FALSE(verify(wire, key, c.auth->protocol));
  }
}
