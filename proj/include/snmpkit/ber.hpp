#pragma once

// BER subset used by SNMP: definite lengths, the universal/application types
// of the SMI, and a tag-dispatch registry that decides how a tag triple is
// decoded. Unregistered tags decode to Raw and re-encode byte-for-byte.

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "snmpkit/bytes.hpp"
#include "snmpkit/error.hpp"

namespace snmp::ber {

using BigInt = boost::multiprecision::cpp_int;

enum class TagClass : std::uint8_t { universal = 0, application = 1, context = 2, private_use = 3 };

struct Tag {
  TagClass cls = TagClass::universal;
  bool constructed = false;
  std::uint32_t number = 0;

  friend auto operator<=>(const Tag&, const Tag&) = default;
};

// Universal tag numbers used by SNMP.
inline constexpr std::uint32_t kInteger = 2;
inline constexpr std::uint32_t kOctetString = 4;
inline constexpr std::uint32_t kNull = 5;
inline constexpr std::uint32_t kObjectId = 6;
inline constexpr std::uint32_t kSequence = 16;

class Error : public snmp::Error {
 public:
  using snmp::Error::Error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Length field or payload runs past the end of the input.
class TruncatedError : public DecodeError {
 public:
  TruncatedError(std::size_t needed, std::size_t have);
  std::size_t needed() const { return needed_; }
  std::size_t have() const { return have_; }

 private:
  std::size_t needed_;
  std::size_t have_;
};

/// Indefinite lengths and other forms SNMP never uses.
class UnsupportedFormError : public DecodeError {
 public:
  using DecodeError::DecodeError;
};

class EncodeError : public Error {
 public:
  using Error::Error;
};

class Value;

struct Integer {
  BigInt value;
  Integer() = default;
  Integer(std::int64_t v) : value(v) {}
  explicit Integer(BigInt v) : value(std::move(v)) {}
  friend bool operator==(const Integer&, const Integer&) = default;
};

struct OctetString {
  Bytes bytes;
  OctetString() = default;
  explicit OctetString(Bytes b) : bytes(std::move(b)) {}
  explicit OctetString(std::string_view text) : bytes(text.begin(), text.end()) {}
  std::string text() const { return std::string(bytes.begin(), bytes.end()); }
  friend bool operator==(const OctetString&, const OctetString&) = default;
};

struct Null {
  friend bool operator==(const Null&, const Null&) = default;
};

struct ObjectId {
  Oid arcs;
  friend bool operator==(const ObjectId&, const ObjectId&) = default;
};

struct Sequence {
  std::vector<Value> items;
  friend bool operator==(const Sequence&, const Sequence&);
};

struct IpAddress {
  std::array<std::uint8_t, 4> octets{};
  friend bool operator==(const IpAddress&, const IpAddress&) = default;
};

struct Counter32 {
  std::uint32_t value = 0;
  friend bool operator==(const Counter32&, const Counter32&) = default;
};

struct Gauge32 {
  std::uint32_t value = 0;
  friend bool operator==(const Gauge32&, const Gauge32&) = default;
};

struct TimeTicks {
  std::uint32_t value = 0;
  friend bool operator==(const TimeTicks&, const TimeTicks&) = default;
};

struct Opaque {
  Bytes bytes;
  friend bool operator==(const Opaque&, const Opaque&) = default;
};

struct Counter64 {
  std::uint64_t value = 0;
  friend bool operator==(const Counter64&, const Counter64&) = default;
};

struct NoSuchObject {
  friend bool operator==(const NoSuchObject&, const NoSuchObject&) = default;
};
struct NoSuchInstance {
  friend bool operator==(const NoSuchInstance&, const NoSuchInstance&) = default;
};
struct EndOfMibView {
  friend bool operator==(const EndOfMibView&, const EndOfMibView&) = default;
};

/// Constructed value with an explicit tag, e.g. an SNMP PDU ([context n]).
struct Constructed {
  Tag tag;
  std::vector<Value> items;
  friend bool operator==(const Constructed&, const Constructed&);
};

/// Undecoded TLV. `header` holds the original identifier and length octets
/// when the value came off the wire, so re-encoding reproduces them exactly.
struct Raw {
  Tag tag;
  Bytes header;
  Bytes payload;
  friend bool operator==(const Raw&, const Raw&) = default;
};

enum class Kind {
  integer,
  octet_string,
  null,
  object_id,
  sequence,
  ip_address,
  counter32,
  gauge32,
  timeticks,
  opaque,
  counter64,
  no_such_object,
  no_such_instance,
  end_of_mib_view,
  constructed,
  raw,
};

std::string_view to_string(Kind kind);

class Value {
 public:
  using Variant = std::variant<Integer, OctetString, Null, ObjectId, Sequence, IpAddress, Counter32,
                               Gauge32, TimeTicks, Opaque, Counter64, NoSuchObject, NoSuchInstance,
                               EndOfMibView, Constructed, Raw>;

  Value() : v_(Null{}) {}
  template <class T>
    requires std::is_constructible_v<Variant, T&&> && (!std::is_same_v<std::decay_t<T>, Value>)
  Value(T&& v) : v_(std::forward<T>(v)) {}

  Kind kind() const { return static_cast<Kind>(v_.index()); }

  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v_);
  }
  template <class T>
  const T& as() const {
    return std::get<T>(v_);
  }
  template <class T>
  T& as() {
    return std::get<T>(v_);
  }
  template <class T>
  const T* get_if() const {
    return std::get_if<T>(&v_);
  }
  const Variant& variant() const { return v_; }

  /// True for the three v2 exception markers.
  bool is_exception() const {
    return is<NoSuchObject>() || is<NoSuchInstance>() || is<EndOfMibView>();
  }

  friend bool operator==(const Value&, const Value&) = default;

 private:
  Variant v_;
};

inline Value make_sequence(std::vector<Value> items) { return Sequence{std::move(items)}; }
inline Value make_oid(Oid arcs) { return ObjectId{std::move(arcs)}; }
inline Value make_string(std::string_view text) { return OctetString(text); }

/// Maps (class, constructed, number) to the kind of value a tag decodes to.
class TypeRegistry {
 public:
  using Key = std::tuple<int, int, std::uint32_t>;

  void register_type(int cls, int constructed, std::uint32_t number, Kind kind);
  std::optional<Kind> lookup(const Tag& tag) const;

  /// Universal SNMP types, application types, v2 exception markers and the
  /// nine SNMP PDU tags.
  static TypeRegistry snmp_defaults();

 private:
  std::map<Key, Kind> table_;
};

/// Process-wide registry preloaded with snmp_defaults(). Read-only after
/// start-up unless the embedding application serializes registration.
TypeRegistry& default_registry();

inline void register_type(TypeRegistry& registry, int cls, int constructed, std::uint32_t number,
                          Kind kind) {
  registry.register_type(cls, constructed, number, kind);
}

Tag tag_of(const Value& value);

Bytes encode_length(std::size_t n);
/// Returns (length, consumed). Throws on the indefinite form or truncation.
std::pair<std::size_t, std::size_t> decode_length(ByteView input);

Bytes encode_tag(const Tag& tag);
std::pair<Tag, std::size_t> decode_tag(ByteView input);

Bytes encode(const Value& value);
void encode_to(const Value& value, Bytes& out);

struct Decoded {
  Value value;
  std::size_t consumed = 0;
};

Decoded decode(ByteView input, const TypeRegistry& registry = default_registry());
/// Reads exactly one TLV from the stream.
Value decode(std::istream& in, const TypeRegistry& registry = default_registry());

/// Minimal two's-complement content octets.
Bytes encode_integer_content(const BigInt& v);
BigInt decode_integer_content(ByteView content);

/// Unsigned content with a leading 0x00 when the high bit is set.
Bytes encode_unsigned_content(std::uint64_t v);

}  // namespace snmp::ber
