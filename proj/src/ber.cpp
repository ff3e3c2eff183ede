#include "snmpkit/ber.hpp"

#include <istream>
#include <iterator>
#include <limits>

namespace snmp::ber {

namespace {

constexpr std::size_t kMaxLengthOctets = sizeof(std::size_t);

void need(std::size_t needed, std::size_t have) {
  if (needed > have) throw TruncatedError(needed, have);
}

std::uint64_t decode_unsigned(ByteView content, unsigned max_bits, std::string_view what) {
  std::size_t i = 0;
  // one leading zero is allowed to keep the value non-negative
  if (content.size() > 1 && content[0] == 0x00) i = 1;
  if (content.empty()) throw DecodeError(std::string(what) + ": empty content");
  if (content.size() - i > max_bits / 8) throw DecodeError(std::string(what) + ": value too large");
  std::uint64_t v = 0;
  for (; i < content.size(); ++i) v = (v << 8) | content[i];
  return v;
}

std::uint32_t decode_u32(ByteView content, std::string_view what) {
  return static_cast<std::uint32_t>(decode_unsigned(content, 32, what));
}

void encode_oid_content(const Oid& arcs_in, Bytes& out) {
  Oid arcs = arcs_in;
  // BER needs at least two arcs; shorter lists are padded with zero arcs.
  while (arcs.size() < 2) arcs.push_back(0);
  if (arcs[0] > 2) throw EncodeError("object identifier: first arc must be 0, 1 or 2");
  if (arcs[0] < 2 && arcs[1] >= 40)
    throw EncodeError("object identifier: second arc must be < 40 under arc 0 or 1");
  auto put_base128 = [&out](std::uint64_t v) {
    std::uint8_t buf[10];
    int n = 0;
    do {
      buf[n++] = static_cast<std::uint8_t>(v & 0x7f);
      v >>= 7;
    } while (v);
    while (n > 1) out.push_back(static_cast<std::uint8_t>(buf[--n] | 0x80));
    out.push_back(buf[0]);
  };
  put_base128(static_cast<std::uint64_t>(arcs[0]) * 40 + arcs[1]);
  for (std::size_t i = 2; i < arcs.size(); ++i) put_base128(arcs[i]);
}

Oid decode_oid_content(ByteView content) {
  if (content.empty()) throw DecodeError("object identifier: empty content");
  Oid arcs;
  std::uint64_t v = 0;
  bool first = true;
  bool in_arc = false;
  for (std::size_t i = 0; i < content.size(); ++i) {
    if (!in_arc && content[i] == 0x80) throw DecodeError("object identifier: non-minimal arc");
    v = (v << 7) | (content[i] & 0x7f);
    in_arc = true;
    if (v > (first ? 80ull + std::numeric_limits<std::uint32_t>::max()
                   : std::numeric_limits<std::uint32_t>::max()))
      throw DecodeError("object identifier: arc exceeds 32 bits");
    if (!(content[i] & 0x80)) {
      if (first) {
        if (v < 40) {
          arcs.push_back(0);
          arcs.push_back(static_cast<std::uint32_t>(v));
        } else if (v < 80) {
          arcs.push_back(1);
          arcs.push_back(static_cast<std::uint32_t>(v - 40));
        } else {
          arcs.push_back(2);
          arcs.push_back(static_cast<std::uint32_t>(v - 80));
        }
        first = false;
      } else {
        arcs.push_back(static_cast<std::uint32_t>(v));
      }
      v = 0;
      in_arc = false;
    }
  }
  if (in_arc) throw DecodeError("object identifier: truncated arc");
  return arcs;
}

void put_tlv(const Tag& tag, const Bytes& content, Bytes& out) {
  auto t = encode_tag(tag);
  auto l = encode_length(content.size());
  out.insert(out.end(), t.begin(), t.end());
  out.insert(out.end(), l.begin(), l.end());
  out.insert(out.end(), content.begin(), content.end());
}

Decoded decode_at(ByteView input, const TypeRegistry& registry, int depth);

std::vector<Value> decode_children(ByteView content, const TypeRegistry& registry, int depth) {
  std::vector<Value> items;
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto d = decode_at(content.subspan(pos), registry, depth + 1);
    pos += d.consumed;
    items.push_back(std::move(d.value));
  }
  return items;
}

Value decode_content(Kind kind, const Tag& tag, ByteView content, const TypeRegistry& registry,
                     int depth) {
  switch (kind) {
    case Kind::integer:
      if (content.empty()) throw DecodeError("integer: empty content");
      return Integer(decode_integer_content(content));
    case Kind::octet_string:
      return OctetString(Bytes(content.begin(), content.end()));
    case Kind::null:
      if (!content.empty()) throw DecodeError("null: non-empty content");
      return Null{};
    case Kind::object_id:
      return ObjectId{decode_oid_content(content)};
    case Kind::sequence:
      return Sequence{decode_children(content, registry, depth)};
    case Kind::ip_address: {
      if (content.size() != 4) throw DecodeError("ip address: content must be 4 octets");
      IpAddress ip;
      std::copy(content.begin(), content.end(), ip.octets.begin());
      return ip;
    }
    case Kind::counter32:
      return Counter32{decode_u32(content, "counter32")};
    case Kind::gauge32:
      return Gauge32{decode_u32(content, "gauge32")};
    case Kind::timeticks:
      return TimeTicks{decode_u32(content, "timeticks")};
    case Kind::opaque:
      return Opaque{Bytes(content.begin(), content.end())};
    case Kind::counter64:
      return Counter64{decode_unsigned(content, 64, "counter64")};
    case Kind::no_such_object:
      return NoSuchObject{};
    case Kind::no_such_instance:
      return NoSuchInstance{};
    case Kind::end_of_mib_view:
      return EndOfMibView{};
    case Kind::constructed:
      if (!tag.constructed) throw DecodeError("constructed kind registered for a primitive tag");
      return Constructed{tag, decode_children(content, registry, depth)};
    case Kind::raw:
      break;
  }
  return Raw{tag, {}, Bytes(content.begin(), content.end())};
}

Decoded decode_at(ByteView input, const TypeRegistry& registry, int depth) {
  if (depth > 64) throw DecodeError("nesting too deep");
  auto [tag, tag_len] = decode_tag(input);
  auto [length, len_len] = decode_length(input.subspan(tag_len));
  std::size_t header = tag_len + len_len;
  need(length, input.size() - header);
  auto content = input.subspan(header, length);
  auto kind = registry.lookup(tag);
  Decoded d;
  d.consumed = header + length;
  if (!kind || *kind == Kind::raw) {
    d.value = Raw{tag, Bytes(input.begin(), input.begin() + static_cast<std::ptrdiff_t>(header)),
                  Bytes(content.begin(), content.end())};
  } else {
    d.value = decode_content(*kind, tag, content, registry, depth);
  }
  return d;
}

}  // namespace

TruncatedError::TruncatedError(std::size_t needed, std::size_t have)
    : DecodeError("truncated input: need " + std::to_string(needed) + " bytes, have " +
                  std::to_string(have)),
      needed_(needed),
      have_(have) {}

bool operator==(const Sequence& a, const Sequence& b) { return a.items == b.items; }

bool operator==(const Constructed& a, const Constructed& b) {
  return a.tag == b.tag && a.items == b.items;
}

std::string_view to_string(Kind kind) {
  switch (kind) {
    case Kind::integer: return "integer";
    case Kind::octet_string: return "octet-string";
    case Kind::null: return "null";
    case Kind::object_id: return "object-id";
    case Kind::sequence: return "sequence";
    case Kind::ip_address: return "ip-address";
    case Kind::counter32: return "counter32";
    case Kind::gauge32: return "gauge32";
    case Kind::timeticks: return "timeticks";
    case Kind::opaque: return "opaque";
    case Kind::counter64: return "counter64";
    case Kind::no_such_object: return "no-such-object";
    case Kind::no_such_instance: return "no-such-instance";
    case Kind::end_of_mib_view: return "end-of-mib-view";
    case Kind::constructed: return "constructed";
    case Kind::raw: return "raw";
  }
  return "unknown";
}

void TypeRegistry::register_type(int cls, int constructed, std::uint32_t number, Kind kind) {
  table_[Key{cls, constructed ? 1 : 0, number}] = kind;
}

std::optional<Kind> TypeRegistry::lookup(const Tag& tag) const {
  auto it = table_.find(Key{static_cast<int>(tag.cls), tag.constructed ? 1 : 0, tag.number});
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

TypeRegistry TypeRegistry::snmp_defaults() {
  TypeRegistry r;
  r.register_type(0, 0, kInteger, Kind::integer);
  r.register_type(0, 0, kOctetString, Kind::octet_string);
  r.register_type(0, 0, kNull, Kind::null);
  r.register_type(0, 0, kObjectId, Kind::object_id);
  r.register_type(0, 1, kSequence, Kind::sequence);
  r.register_type(1, 0, 0, Kind::ip_address);
  r.register_type(1, 0, 1, Kind::counter32);
  r.register_type(1, 0, 2, Kind::gauge32);
  r.register_type(1, 0, 3, Kind::timeticks);
  r.register_type(1, 0, 4, Kind::opaque);
  r.register_type(1, 0, 6, Kind::counter64);
  r.register_type(2, 0, 0, Kind::no_such_object);
  r.register_type(2, 0, 1, Kind::no_such_instance);
  r.register_type(2, 0, 2, Kind::end_of_mib_view);
  for (std::uint32_t pdu = 0; pdu <= 8; ++pdu) r.register_type(2, 1, pdu, Kind::constructed);
  return r;
}

TypeRegistry& default_registry() {
  static TypeRegistry registry = TypeRegistry::snmp_defaults();
  return registry;
}

Tag tag_of(const Value& value) {
  using TC = TagClass;
  switch (value.kind()) {
    case Kind::integer: return {TC::universal, false, kInteger};
    case Kind::octet_string: return {TC::universal, false, kOctetString};
    case Kind::null: return {TC::universal, false, kNull};
    case Kind::object_id: return {TC::universal, false, kObjectId};
    case Kind::sequence: return {TC::universal, true, kSequence};
    case Kind::ip_address: return {TC::application, false, 0};
    case Kind::counter32: return {TC::application, false, 1};
    case Kind::gauge32: return {TC::application, false, 2};
    case Kind::timeticks: return {TC::application, false, 3};
    case Kind::opaque: return {TC::application, false, 4};
    case Kind::counter64: return {TC::application, false, 6};
    case Kind::no_such_object: return {TC::context, false, 0};
    case Kind::no_such_instance: return {TC::context, false, 1};
    case Kind::end_of_mib_view: return {TC::context, false, 2};
    case Kind::constructed: return value.as<Constructed>().tag;
    case Kind::raw: return value.as<Raw>().tag;
  }
  throw EncodeError("unencodable value kind");
}

Bytes encode_length(std::size_t n) {
  if (n <= 127) return {static_cast<std::uint8_t>(n)};
  Bytes digits;
  while (n) {
    digits.insert(digits.begin(), static_cast<std::uint8_t>(n & 0xff));
    n >>= 8;
  }
  Bytes out{static_cast<std::uint8_t>(0x80 | digits.size())};
  out.insert(out.end(), digits.begin(), digits.end());
  return out;
}

std::pair<std::size_t, std::size_t> decode_length(ByteView input) {
  need(1, input.size());
  std::uint8_t first = input[0];
  if (first < 0x80) return {first, 1};
  if (first == 0x80) throw UnsupportedFormError("indefinite length form is not supported");
  std::size_t k = first & 0x7f;
  if (k == 0x7f) throw UnsupportedFormError("reserved length octet 0xff");
  if (k > kMaxLengthOctets) throw UnsupportedFormError("length field too wide");
  need(1 + k, input.size());
  std::size_t n = 0;
  for (std::size_t i = 1; i <= k; ++i) n = (n << 8) | input[i];
  return {n, 1 + k};
}

Bytes encode_tag(const Tag& tag) {
  if (tag.number >= (1u << 31)) throw EncodeError("tag number must be < 2^31");
  std::uint8_t lead = static_cast<std::uint8_t>((static_cast<unsigned>(tag.cls) << 6) |
                                                (tag.constructed ? 0x20 : 0x00));
  if (tag.number <= 30) return {static_cast<std::uint8_t>(lead | tag.number)};
  Bytes out{static_cast<std::uint8_t>(lead | 0x1f)};
  std::uint8_t buf[5];
  int n = 0;
  std::uint32_t v = tag.number;
  do {
    buf[n++] = static_cast<std::uint8_t>(v & 0x7f);
    v >>= 7;
  } while (v);
  while (n > 1) out.push_back(static_cast<std::uint8_t>(buf[--n] | 0x80));
  out.push_back(buf[0]);
  return out;
}

std::pair<Tag, std::size_t> decode_tag(ByteView input) {
  need(1, input.size());
  Tag tag;
  tag.cls = static_cast<TagClass>(input[0] >> 6);
  tag.constructed = (input[0] & 0x20) != 0;
  std::uint32_t low = input[0] & 0x1f;
  if (low != 0x1f) {
    tag.number = low;
    return {tag, 1};
  }
  std::uint64_t v = 0;
  std::size_t i = 1;
  for (;; ++i) {
    need(i + 1, input.size());
    if (i == 1 && input[i] == 0x80) throw DecodeError("tag: non-minimal high tag number");
    v = (v << 7) | (input[i] & 0x7f);
    if (v >= (1ull << 31)) throw DecodeError("tag: number must be < 2^31");
    if (!(input[i] & 0x80)) break;
  }
  tag.number = static_cast<std::uint32_t>(v);
  return {tag, i + 1};
}

Bytes encode_integer_content(const BigInt& v) {
  Bytes out;
  if (v >= 0) {
    BigInt x = v;
    do {
      out.insert(out.begin(), static_cast<std::uint8_t>(static_cast<unsigned>(x & 0xff)));
      x >>= 8;
    } while (x != 0);
    if (out[0] & 0x80) out.insert(out.begin(), 0x00);
  } else {
    // two's complement over the smallest byte width that holds v
    std::size_t width = 1;
    BigInt bound = -128;
    while (v < bound) {
      ++width;
      bound *= 256;
    }
    BigInt x = (BigInt(1) << (8 * width)) + v;
    for (std::size_t i = 0; i < width; ++i) {
      out.insert(out.begin(), static_cast<std::uint8_t>(static_cast<unsigned>(x & 0xff)));
      x >>= 8;
    }
  }
  return out;
}

BigInt decode_integer_content(ByteView content) {
  BigInt v = 0;
  for (auto b : content) v = (v << 8) | b;
  if (!content.empty() && (content[0] & 0x80)) v -= BigInt(1) << (8 * content.size());
  return v;
}

Bytes encode_unsigned_content(std::uint64_t v) {
  Bytes out;
  do {
    out.insert(out.begin(), static_cast<std::uint8_t>(v & 0xff));
    v >>= 8;
  } while (v);
  if (out[0] & 0x80) out.insert(out.begin(), 0x00);
  return out;
}

void encode_to(const Value& value, Bytes& out) {
  Tag tag = tag_of(value);
  Bytes content;
  switch (value.kind()) {
    case Kind::integer:
      content = encode_integer_content(value.as<Integer>().value);
      break;
    case Kind::octet_string:
      content = value.as<OctetString>().bytes;
      break;
    case Kind::null:
    case Kind::no_such_object:
    case Kind::no_such_instance:
    case Kind::end_of_mib_view:
      break;
    case Kind::object_id:
      encode_oid_content(value.as<ObjectId>().arcs, content);
      break;
    case Kind::sequence:
      for (const auto& item : value.as<Sequence>().items) encode_to(item, content);
      break;
    case Kind::ip_address: {
      const auto& o = value.as<IpAddress>().octets;
      content.assign(o.begin(), o.end());
      break;
    }
    case Kind::counter32:
      content = encode_unsigned_content(value.as<Counter32>().value);
      break;
    case Kind::gauge32:
      content = encode_unsigned_content(value.as<Gauge32>().value);
      break;
    case Kind::timeticks:
      content = encode_unsigned_content(value.as<TimeTicks>().value);
      break;
    case Kind::opaque:
      content = value.as<Opaque>().bytes;
      break;
    case Kind::counter64:
      content = encode_unsigned_content(value.as<Counter64>().value);
      break;
    case Kind::constructed:
      if (!tag.constructed) throw EncodeError("constructed value carries a primitive tag");
      for (const auto& item : value.as<Constructed>().items) encode_to(item, content);
      break;
    case Kind::raw: {
      const auto& raw = value.as<Raw>();
      if (!raw.header.empty()) {
        out.insert(out.end(), raw.header.begin(), raw.header.end());
        out.insert(out.end(), raw.payload.begin(), raw.payload.end());
        return;
      }
      content = raw.payload;
      break;
    }
  }
  put_tlv(tag, content, out);
}

Bytes encode(const Value& value) {
  Bytes out;
  encode_to(value, out);
  return out;
}

Decoded decode(ByteView input, const TypeRegistry& registry) {
  return decode_at(input, registry, 0);
}

Value decode(std::istream& in, const TypeRegistry& registry) {
  // Read identifier and length octets first, then exactly the payload.
  Bytes buf;
  auto get = [&]() {
    int c = in.get();
    if (c == std::char_traits<char>::eof()) throw TruncatedError(buf.size() + 1, buf.size());
    buf.push_back(static_cast<std::uint8_t>(c));
  };
  get();
  if ((buf[0] & 0x1f) == 0x1f) {
    do get();
    while (buf.back() & 0x80);
  }
  std::size_t tag_len = buf.size();
  get();
  if (buf[tag_len] & 0x80) {
    std::size_t k = buf[tag_len] & 0x7f;
    for (std::size_t i = 0; i < k && i < kMaxLengthOctets + 1; ++i) get();
  }
  auto [length, len_len] = decode_length(ByteView(buf).subspan(tag_len));
  std::size_t header = tag_len + len_len;
  buf.resize(header + length);
  in.read(reinterpret_cast<char*>(buf.data() + header), static_cast<std::streamsize>(length));
  auto got = static_cast<std::size_t>(in.gcount());
  if (got < length) throw TruncatedError(length, got);
  return decode(ByteView(buf), registry).value;
}

}  // namespace snmp::ber
