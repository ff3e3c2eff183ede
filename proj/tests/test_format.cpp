#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "snmpkit/format.hpp"

namespace snmp {
namespace {

using testsupport::corpus;

TEST(Format, Timeticks) {
  EXPECT_EQ(format_timeticks(0), "(0) 0:00:00.00");
  EXPECT_EQ(format_timeticks(123456), "(123456) 0:20:34.56");
  EXPECT_EQ(format_timeticks(8640000), "(8640000) 1 day, 0:00:00.00");
  EXPECT_EQ(format_timeticks(17280001), "(17280001) 2 days, 0:00:00.01");
  EXPECT_EQ(format_timeticks(4294967295u), "(4294967295) 497 days, 2:27:52.95");
}

TEST(Format, TypedValues) {
  const auto& r = corpus();
  EXPECT_EQ(format_value(ber::Integer(-5), r), "INTEGER: -5");
  EXPECT_EQ(format_value(ber::OctetString("eth0"), r), "STRING: eth0");
  EXPECT_EQ(format_value(ber::OctetString(std::string_view()), r), "\"\"");
  EXPECT_EQ(format_value(ber::OctetString(Bytes{0xde, 0xad, 0x00}), r), "Hex-STRING: DE AD 00");
  EXPECT_EQ(format_value(ber::Null{}, r), "NULL");
  EXPECT_EQ(format_value(ber::ObjectId{{1, 3, 6, 1, 2, 1, 1}}, r), "OID: SNMPv2-MIB::system");
  EXPECT_EQ(format_value(ber::IpAddress{{10, 0, 0, 1}}, r), "IpAddress: 10.0.0.1");
  EXPECT_EQ(format_value(ber::Counter32{7}, r), "Counter32: 7");
  EXPECT_EQ(format_value(ber::Gauge32{8}, r), "Gauge32: 8");
  EXPECT_EQ(format_value(ber::TimeTicks{5}, r), "Timeticks: (5) 0:00:00.05");
  EXPECT_EQ(format_value(ber::Counter64{18446744073709551615ull}, r), "Counter64: 18446744073709551615");
  EXPECT_EQ(format_value(ber::NoSuchObject{}, r), "No Such Object available on this agent at this OID");
  EXPECT_EQ(format_value(ber::NoSuchInstance{}, r), "No Such Instance currently exists at this OID");
}

TEST(Format, Binding) {
  const auto& r = corpus();
  Binding b{r.resolve("sysDescr.0"), ber::OctetString("Linux box")};
  EXPECT_EQ(format_binding(b, r), "SNMPv2-MIB::sysDescr.0 = STRING: Linux box");
}

TEST(Format, ParseTypedValues) {
  const auto& r = corpus();
  EXPECT_EQ(parse_typed_value('i', "-12", r), ber::Value(ber::Integer(-12)));
  EXPECT_EQ(parse_typed_value('u', "4294967295", r), ber::Value(ber::Gauge32{4294967295u}));
  EXPECT_EQ(parse_typed_value('c', "3", r), ber::Value(ber::Counter32{3}));
  EXPECT_EQ(parse_typed_value('C', "18446744073709551615", r), ber::Value(ber::Counter64{18446744073709551615ull}));
  EXPECT_EQ(parse_typed_value('t', "100", r), ber::Value(ber::TimeTicks{100}));
  EXPECT_EQ(parse_typed_value('s', "hi", r), ber::Value(ber::OctetString("hi")));
  EXPECT_EQ(parse_typed_value('x', "0a0B", r), ber::Value(ber::OctetString(Bytes{0x0a, 0x0b})));
  EXPECT_EQ(parse_typed_value('n', "", r), ber::Value(ber::Null{}));
  EXPECT_EQ(parse_typed_value('o', "sysDescr", r), ber::Value(ber::ObjectId{{1, 3, 6, 1, 2, 1, 1, 1}}));
  EXPECT_EQ(parse_typed_value('a', "192.168.0.254", r), ber::Value(ber::IpAddress{{192, 168, 0, 254}}));
  EXPECT_THROW(parse_typed_value('u', "4294967296", r), ArgumentError);
  EXPECT_THROW(parse_typed_value('i', "12x", r), ArgumentError);
  EXPECT_THROW(parse_typed_value('a', "1.2.3", r), ArgumentError);
  EXPECT_THROW(parse_typed_value('a', "1.2.3.256", r), ArgumentError);
  EXPECT_THROW(parse_typed_value('q', "1", r), ArgumentError);
}

}  // namespace
}  // namespace snmp
