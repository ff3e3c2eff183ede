#include "snmpkit/pdu.hpp"

#include <limits>
#include <random>

namespace snmp {

using ber::Value;

std::string_view to_string(Version v) {
  switch (v) {
    case Version::v1: return "1";
    case Version::v2c: return "2c";
    case Version::v3: return "3";
  }
  return "?";
}

std::optional<Version> parse_version(std::string_view text) {
  if (text == "1" || text == "v1") return Version::v1;
  if (text == "2c" || text == "v2c" || text == "2") return Version::v2c;
  if (text == "3" || text == "v3") return Version::v3;
  return std::nullopt;
}

std::string_view to_string(PduType type) {
  switch (type) {
    case PduType::get_request: return "get-request";
    case PduType::get_next_request: return "get-next-request";
    case PduType::response: return "response";
    case PduType::set_request: return "set-request";
    case PduType::trap_v1: return "trap";
    case PduType::get_bulk_request: return "get-bulk-request";
    case PduType::inform_request: return "inform-request";
    case PduType::snmpv2_trap: return "snmpV2-trap";
    case PduType::report: return "report";
  }
  return "?";
}

std::string to_string(ErrorStatus status) {
  static constexpr std::string_view kNames[] = {
      "noError",         "tooBig",         "noSuchName",          "badValue",
      "readOnly",        "genErr",         "noAccess",            "wrongType",
      "wrongLength",     "wrongEncoding",  "wrongValue",          "noCreation",
      "inconsistentValue", "resourceUnavailable", "commitFailed", "undoFailed",
      "authorizationError", "notWritable", "inconsistentName"};
  auto i = static_cast<std::int32_t>(status);
  if (i >= 0 && i < static_cast<std::int32_t>(std::size(kNames))) return std::string(kNames[i]);
  return std::to_string(i);
}

MessageError::MessageError(const std::string& path, const std::string& message)
    : Error(path + ": " + message), path_(path) {}

VersionError::VersionError(std::int32_t got, Version expected)
    : Error("message version " + std::to_string(got) + " does not match session version " +
            std::to_string(static_cast<std::int32_t>(expected))),
      got_(got) {}

namespace {

ber::Tag pdu_tag(PduType type) { return {ber::TagClass::context, true, static_cast<std::uint32_t>(type)}; }

Value int_value(std::int64_t v) { return ber::Integer(v); }

Value octets(const Bytes& b) { return ber::OctetString(b); }
Value octets(std::string_view s) { return ber::OctetString(s); }

// -- decoding helpers -------------------------------------------------------

const std::vector<Value>& seq_items(const Value& v, const std::string& path, std::size_t count) {
  if (!v.is<ber::Sequence>()) throw MessageError(path, "expected SEQUENCE, got " + std::string(ber::to_string(v.kind())));
  const auto& items = v.as<ber::Sequence>().items;
  if (count != 0 && items.size() != count)
    throw MessageError(path, "expected " + std::to_string(count) + " elements, got " + std::to_string(items.size()));
  return items;
}

std::int64_t get_int(const Value& v, const std::string& path, std::int64_t lo = std::numeric_limits<std::int32_t>::min(),
                     std::int64_t hi = std::numeric_limits<std::int32_t>::max()) {
  if (!v.is<ber::Integer>()) throw MessageError(path, "expected INTEGER, got " + std::string(ber::to_string(v.kind())));
  const auto& big = v.as<ber::Integer>().value;
  if (big < lo || big > hi) throw MessageError(path, "integer out of range");
  return static_cast<std::int64_t>(big);
}

const Bytes& get_octets(const Value& v, const std::string& path) {
  if (!v.is<ber::OctetString>())
    throw MessageError(path, "expected OCTET STRING, got " + std::string(ber::to_string(v.kind())));
  return v.as<ber::OctetString>().bytes;
}

const Oid& get_oid(const Value& v, const std::string& path) {
  if (!v.is<ber::ObjectId>())
    throw MessageError(path, "expected OBJECT IDENTIFIER, got " + std::string(ber::to_string(v.kind())));
  return v.as<ber::ObjectId>().arcs;
}

bool allowed_binding_value(const Value& v, Version version) {
  switch (v.kind()) {
    case ber::Kind::integer:
    case ber::Kind::octet_string:
    case ber::Kind::null:
    case ber::Kind::object_id:
    case ber::Kind::ip_address:
    case ber::Kind::counter32:
    case ber::Kind::gauge32:
    case ber::Kind::timeticks:
    case ber::Kind::opaque:
      return true;
    case ber::Kind::counter64:
    case ber::Kind::no_such_object:
    case ber::Kind::no_such_instance:
    case ber::Kind::end_of_mib_view:
      return version != Version::v1;
    default:
      return false;
  }
}

std::vector<VarBind> bindings_from(const Value& v, Version version, const std::string& path) {
  const auto& items = seq_items(v, path, 0);
  std::vector<VarBind> out;
  out.reserve(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::string p = path + "[" + std::to_string(i) + "]";
    const auto& pair = seq_items(items[i], p, 2);
    VarBind vb{get_oid(pair[0], p + ".name"), pair[1]};
    if (!allowed_binding_value(vb.value, version))
      throw MessageError(p + ".value", std::string(ber::to_string(vb.value.kind())) + " not allowed in " +
                                           (version == Version::v1 ? "SNMPv1" : "SNMP") + " bindings");
    out.push_back(std::move(vb));
  }
  return out;
}

Value bindings_value(const std::vector<VarBind>& bindings) {
  std::vector<Value> items;
  items.reserve(bindings.size());
  for (const auto& vb : bindings) items.push_back(ber::make_sequence({ber::ObjectId{vb.name}, vb.value}));
  return ber::Sequence{std::move(items)};
}

Value usm_value(const UsmParams& p) {
  return ber::make_sequence({octets(p.engine_id), int_value(p.engine_boots), int_value(p.engine_time),
                             octets(p.user_name), octets(p.auth_params), octets(p.priv_params)});
}

UsmParams usm_from(ByteView bytes, const std::string& path) {
  ber::Decoded d;
  try {
    d = ber::decode(bytes);
  } catch (const ber::Error& e) {
    throw MessageError(path, e.what());
  }
  if (d.consumed != bytes.size()) throw MessageError(path, "trailing bytes");
  const auto& items = seq_items(d.value, path, 6);
  UsmParams p;
  p.engine_id = get_octets(items[0], path + ".engineID");
  p.engine_boots = static_cast<std::int32_t>(get_int(items[1], path + ".engineBoots", 0));
  p.engine_time = static_cast<std::int32_t>(get_int(items[2], path + ".engineTime", 0));
  const Bytes& user = get_octets(items[3], path + ".userName");
  p.user_name.assign(user.begin(), user.end());
  p.auth_params = get_octets(items[4], path + ".authParameters");
  p.priv_params = get_octets(items[5], path + ".privParameters");
  return p;
}

Value scoped_value(const ScopedPdu& s) {
  return ber::make_sequence({octets(s.context_engine_id), octets(s.context_name), pdu_to_value(s.pdu)});
}

ScopedPdu scoped_from(const Value& v, const std::string& path) {
  const auto& items = seq_items(v, path, 3);
  ScopedPdu s;
  s.context_engine_id = get_octets(items[0], path + ".contextEngineID");
  const Bytes& name = get_octets(items[1], path + ".contextName");
  s.context_name.assign(name.begin(), name.end());
  s.pdu = pdu_from_value(items[2], Version::v3, path + ".pdu");
  return s;
}

Value decode_whole(ByteView bytes, const std::string& path) {
  ber::Decoded d;
  try {
    d = ber::decode(bytes);
  } catch (const ber::Error& e) {
    throw MessageError(path, e.what());
  }
  if (d.consumed != bytes.size())
    throw MessageError(path, std::to_string(bytes.size() - d.consumed) + " trailing bytes");
  return std::move(d.value);
}

}  // namespace

Value pdu_to_value(const Pdu& pdu) {
  ber::Constructed c{pdu_tag(pdu.type), {}};
  if (pdu.type == PduType::trap_v1) {
    TrapV1 t = pdu.trap.value_or(TrapV1{});
    c.items = {ber::ObjectId{t.enterprise}, ber::IpAddress{t.agent_address}, int_value(t.generic_trap),
               int_value(t.specific_trap), ber::TimeTicks{t.timestamp}, bindings_value(pdu.bindings)};
  } else {
    c.items = {int_value(pdu.request_id), int_value(pdu.error_status), int_value(pdu.error_index),
               bindings_value(pdu.bindings)};
  }
  return c;
}

Pdu pdu_from_value(const Value& v, Version version, const std::string& path) {
  if (!v.is<ber::Constructed>() || v.as<ber::Constructed>().tag.cls != ber::TagClass::context ||
      v.as<ber::Constructed>().tag.number > 8) {
    std::string what = v.is<ber::Raw>() ? "tag " + std::to_string(v.as<ber::Raw>().tag.number)
                                        : std::string(ber::to_string(v.kind()));
    throw MessageError(path, "unknown PDU type (" + what + ")");
  }
  const auto& c = v.as<ber::Constructed>();
  Pdu pdu;
  pdu.type = static_cast<PduType>(c.tag.number);
  if (version == Version::v1 && (pdu.type == PduType::get_bulk_request || pdu.type == PduType::inform_request ||
                                 pdu.type == PduType::snmpv2_trap || pdu.type == PduType::report))
    throw MessageError(path, std::string(to_string(pdu.type)) + " is not an SNMPv1 PDU");
  if (version != Version::v1 && pdu.type == PduType::trap_v1)
    throw MessageError(path, "trap-v1 PDU in a non-v1 message");

  if (pdu.type == PduType::trap_v1) {
    if (c.items.size() != 6) throw MessageError(path, "trap PDU needs 6 elements");
    TrapV1 t;
    t.enterprise = get_oid(c.items[0], path + ".enterprise");
    if (!c.items[1].is<ber::IpAddress>()) throw MessageError(path + ".agentAddr", "expected IpAddress");
    t.agent_address = c.items[1].as<ber::IpAddress>().octets;
    t.generic_trap = static_cast<std::int32_t>(get_int(c.items[2], path + ".genericTrap"));
    t.specific_trap = static_cast<std::int32_t>(get_int(c.items[3], path + ".specificTrap"));
    if (!c.items[4].is<ber::TimeTicks>()) throw MessageError(path + ".timeStamp", "expected TimeTicks");
    t.timestamp = c.items[4].as<ber::TimeTicks>().value;
    pdu.trap = t;
    pdu.bindings = bindings_from(c.items[5], version, path + ".bindings");
    return pdu;
  }
  if (c.items.size() != 4) throw MessageError(path, "PDU needs 4 elements");
  pdu.request_id = static_cast<std::int32_t>(get_int(c.items[0], path + ".requestID"));
  pdu.error_status = static_cast<std::int32_t>(get_int(c.items[1], path + ".errorStatus"));
  pdu.error_index = static_cast<std::int32_t>(get_int(c.items[2], path + ".errorIndex"));
  pdu.bindings = bindings_from(c.items[3], version, path + ".bindings");
  return pdu;
}

Bytes encode_scoped_pdu(const ScopedPdu& scoped) { return ber::encode(scoped_value(scoped)); }

ScopedPdu decode_scoped_pdu(ByteView bytes) {
  // Decrypted payloads carry DES padding after the scoped PDU.
  ber::Decoded d;
  try {
    d = ber::decode(bytes);
  } catch (const ber::Error& e) {
    throw MessageError("scopedPDU", e.what());
  }
  return scoped_from(d.value, "scopedPDU");
}

Bytes encode_usm_params(const UsmParams& params) { return ber::encode(usm_value(params)); }

Bytes encode_message(const CommunityMessage& msg) {
  return ber::encode(ber::make_sequence(
      {int_value(static_cast<std::int32_t>(msg.version)), octets(msg.community), pdu_to_value(msg.pdu)}));
}

Bytes encode_message(const V3Message& msg) {
  if ((msg.flags & msg_flags::priv) && !(msg.flags & msg_flags::auth))
    throw ArgumentError("privacy without authentication is not a valid security level");
  Value header = ber::make_sequence({int_value(msg.msg_id), int_value(msg.max_size),
                                     octets(Bytes{msg.flags}), int_value(msg.security_model)});
  Value data = std::holds_alternative<ScopedPdu>(msg.data) ? scoped_value(std::get<ScopedPdu>(msg.data))
                                                           : octets(std::get<Bytes>(msg.data));
  return ber::encode(ber::make_sequence(
      {int_value(3), header, octets(encode_usm_params(msg.usm)), data}));
}

Bytes encode_message(const Message& msg) {
  return std::visit([](const auto& m) { return encode_message(m); }, msg);
}

std::optional<std::int32_t> peek_version(ByteView bytes) {
  try {
    auto [tag, tlen] = ber::decode_tag(bytes);
    if (tag != ber::Tag{ber::TagClass::universal, true, ber::kSequence}) return std::nullopt;
    auto [len, llen] = ber::decode_length(bytes.subspan(tlen));
    (void)len;
    auto d = ber::decode(bytes.subspan(tlen + llen));
    if (!d.value.is<ber::Integer>()) return std::nullopt;
    const auto& v = d.value.as<ber::Integer>().value;
    if (v < 0 || v > std::numeric_limits<std::int32_t>::max()) return std::nullopt;
    return static_cast<std::int32_t>(v);
  } catch (const ber::Error&) {
    return std::nullopt;
  }
}

Message decode_message(ByteView bytes, std::optional<Version> expected) {
  Value root = decode_whole(bytes, "message");
  if (!root.is<ber::Sequence>()) throw MessageError("message", "expected SEQUENCE");
  const auto& items = root.as<ber::Sequence>().items;
  if (items.empty()) throw MessageError("message", "empty message");
  auto raw_version = static_cast<std::int32_t>(get_int(items[0], "message.version", 0));
  if (raw_version != 0 && raw_version != 1 && raw_version != 3)
    throw MessageError("message.version", "unsupported version " + std::to_string(raw_version));
  auto version = static_cast<Version>(raw_version);
  if (expected && *expected != version) throw VersionError(raw_version, *expected);

  if (version != Version::v3) {
    if (items.size() != 3) throw MessageError("message", "community message needs 3 elements");
    CommunityMessage m;
    m.version = version;
    m.community = get_octets(items[1], "message.community");
    m.pdu = pdu_from_value(items[2], version, "message.pdu");
    return m;
  }

  if (items.size() != 4) throw MessageError("message", "v3 message needs 4 elements");
  V3Message m;
  const auto& header = seq_items(items[1], "message.globalData", 4);
  m.msg_id = static_cast<std::int32_t>(get_int(header[0], "message.globalData.msgID", 0));
  m.max_size = static_cast<std::int32_t>(get_int(header[1], "message.globalData.msgMaxSize", 484));
  const Bytes& flags = get_octets(header[2], "message.globalData.msgFlags");
  if (flags.size() != 1) throw MessageError("message.globalData.msgFlags", "must be one octet");
  m.flags = flags[0];
  m.security_model = static_cast<std::int32_t>(get_int(header[3], "message.globalData.msgSecurityModel", 1));
  if ((m.flags & msg_flags::priv) && !(m.flags & msg_flags::auth))
    throw MessageError("message.globalData.msgFlags", "priv flag set without auth flag");
  if (m.security_model != kUsmSecurityModel)
    throw MessageError("message.globalData.msgSecurityModel",
                       "unsupported security model " + std::to_string(m.security_model));
  m.usm = usm_from(get_octets(items[2], "message.securityParameters"), "message.securityParameters");
  if (m.authenticated() && m.usm.auth_params.size() != 12)
    throw MessageError("message.securityParameters.authParameters", "must be 12 octets when authenticated");
  if (m.encrypted()) {
    if (m.usm.priv_params.size() != 8)
      throw MessageError("message.securityParameters.privParameters", "must be 8 octets when encrypted");
    m.data = get_octets(items[3], "message.encryptedPDU");
  } else {
    m.data = scoped_from(items[3], "message.scopedPDU");
  }
  return m;
}

std::optional<std::pair<std::size_t, std::size_t>> find_auth_params(ByteView message) {
  try {
    // Enter a constructed TLV at `pos`, returning the content offset.
    auto enter = [&](std::size_t pos) {
      auto [tag, tlen] = ber::decode_tag(message.subspan(pos));
      auto [len, llen] = ber::decode_length(message.subspan(pos + tlen));
      (void)tag;
      return std::pair<std::size_t, std::size_t>{pos + tlen + llen, len};
    };
    auto skip = [&](std::size_t pos) {
      auto [start, len] = enter(pos);
      return start + len;
    };
    auto [pos, len] = enter(0);
    (void)len;
    pos = skip(pos);  // version
    pos = skip(pos);  // global data
    auto [params, plen] = enter(pos);  // OCTET STRING wrapping USM params
    (void)plen;
    auto [p, l] = enter(params);  // USM SEQUENCE
    (void)l;
    for (int i = 0; i < 4; ++i) p = skip(p);
    auto [auth, alen] = enter(p);
    if (auth + alen > message.size()) return std::nullopt;
    return std::pair<std::size_t, std::size_t>{auth, alen};
  } catch (const ber::Error&) {
    return std::nullopt;
  }
}

Pdu make_request_pdu(PduType type, const std::vector<BindingSpec>& bindings, const mib::Registry& registry,
                     std::int32_t request_id) {
  if (bindings.empty()) throw ArgumentError("a request needs at least one variable binding");
  Pdu pdu;
  pdu.type = type;
  pdu.request_id = request_id;
  for (const auto& b : bindings)
    pdu.bindings.push_back({registry.resolve(b.oid).number_list(), b.value.value_or(ber::Null{})});
  return pdu;
}

RequestIds::RequestIds() {
  std::random_device rd;
  std::uniform_int_distribution<std::int32_t> dist(1, 1 << 30);
  next_ = dist(rd);
}

RequestIds::RequestIds(std::int32_t first) : next_(first) {}

std::int32_t RequestIds::next() {
  std::int32_t cur = next_.load();
  std::int32_t nxt;
  do {
    nxt = cur == std::numeric_limits<std::int32_t>::max() ? 1 : cur + 1;
  } while (!next_.compare_exchange_weak(cur, nxt));
  return cur;
}

}  // namespace snmp
