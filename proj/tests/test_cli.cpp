#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "fixtures.hpp"

namespace snmp {
namespace {

namespace fs = std::filesystem;
using testsupport::corpus;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliAgent : public ::testing::Test {
 protected:
  void SetUp() override {
    agent_ = std::make_unique<agent::Agent>(agent::AgentConfig{.address = "127.0.0.1", .port = 0});
    agent::install_system_group(agent_->tree(), corpus(), agent_->context(),
                                agent::SystemInfo{testsupport::kSysDescr, "", "", ""});
    agent::install_enterprise_mib(agent_->tree(), corpus(), agent_->context());
    testsupport::install_if_table(agent_->tree(), corpus());
    service_ = std::make_unique<agent::Service>(*agent_);
    target_ = "127.0.0.1:" + std::to_string(service_->port());
  }
  void TearDown() override { service_->stop(); }

  std::unique_ptr<agent::Agent> agent_;
  std::unique_ptr<agent::Service> service_;
  std::string target_;
};

TEST_F(CliAgent, GetPrintsNetSnmpLine) {
  auto r = run({"get", target_, "sysDescr.0"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(r.out, std::string("SNMPv2-MIB::sysDescr.0 = STRING: ") + testsupport::kSysDescr + "\n");
}

TEST_F(CliAgent, PortFlagAndV1) {
  auto r = run({"get", "-v", "1", "-p", std::to_string(service_->port()), "127.0.0.1", "sysServices.0"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(r.out, "SNMPv2-MIB::sysServices.0 = INTEGER: 72\n");
}

TEST_F(CliAgent, GetNextAndWalk) {
  auto next = run({"getnext", target_, "sysDescr.0"});
  EXPECT_EQ(next.code, cli::kOk);
  EXPECT_EQ(next.out.rfind("SNMPv2-MIB::sysObjectID.0 = OID: LISP-MIB::snmpKitAgentNative", 0), 0u) << next.out;
  auto walk = run({"walk", target_, "system"});
  EXPECT_EQ(walk.code, cli::kOk);
  std::istringstream lines(walk.out);
  std::string first;
  std::getline(lines, first);
  EXPECT_EQ(first, std::string("SNMPv2-MIB::sysDescr.0 = STRING: ") + testsupport::kSysDescr);
  EXPECT_NE(walk.out.find("SNMPv2-MIB::sysServices.0 = INTEGER: 72\n"), std::string::npos);
}

TEST_F(CliAgent, BulkAndTable) {
  auto bulk = run({"bulk", "-N", "0", "-R", "2", target_, "ifDescr"});
  EXPECT_EQ(bulk.code, cli::kOk) << bulk.err;
  EXPECT_EQ(bulk.out, "IF-MIB::ifDescr.1 = STRING: if1-c2\nIF-MIB::ifDescr.2 = STRING: if2-c2\n");
  auto table = run({"table", "--count-exchanges", target_, "ifTable"});
  EXPECT_EQ(table.code, cli::kOk) << table.err;
  EXPECT_NE(table.out.find("exchanges: 2\n"), std::string::npos) << table.out;
  EXPECT_NE(table.out.find("if2-c2"), std::string::npos);
}

TEST_F(CliAgent, SnmpErrorExitsOne) {
  auto r = run({"set", target_, "sysDescr.0", "s", "x"});
  EXPECT_EQ(r.code, cli::kSnmpError);
  EXPECT_NE(r.err.find("notWritable"), std::string::npos) << r.err;
  auto v1 = run({"get", "-v", "1", target_, "sysDescr.5"});
  EXPECT_EQ(v1.code, cli::kSnmpError);
  EXPECT_NE(v1.err.find("noSuchName"), std::string::npos);
}

TEST_F(CliAgent, UnknownNameExitsThree) {
  auto r = run({"get", target_, "noSuchObjectName.0"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_NE(r.err.find("Unknown Object Identifier"), std::string::npos);
}

TEST(Cli, TimeoutExitsTwo) {
  net::UdpListener silent("127.0.0.1", 0);
  auto r = run({"get", "-t", "0.05", "-r", "1", "127.0.0.1:" + std::to_string(silent.local_port()), "sysDescr.0"});
  EXPECT_EQ(r.code, cli::kTimeout);
  EXPECT_EQ(r.err, "Timeout: No Response from 127.0.0.1:" + std::to_string(silent.local_port()) + ".\n");
}

TEST(Cli, UsageErrorsExitThree) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"get", "localhost"}).code, cli::kUsage);
  EXPECT_EQ(run({"get", "-v", "9", "localhost", "sysDescr.0"}).code, cli::kUsage);
  EXPECT_EQ(run({"get", "-v", "3", "localhost", "sysDescr.0"}).code, cli::kUsage);
  EXPECT_EQ(run({"set", "localhost", "sysContact.0", "s"}).code, cli::kUsage);
  EXPECT_EQ(run({"get", "localhost:99999", "sysDescr.0"}).code, cli::kUsage);
}

TEST(Cli, HelpExitsZero) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.out.find("walk"), std::string::npos);
}

fs::path temp_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("snmpkit-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Cli, MibcWritesLoadableModule) {
  fs::path dir = temp_dir("mibc");
  auto r = run({"mibc", "-o", dir.string(), std::string(SNMPKIT_TEST_DATA_DIR) + "/SNMPKIT-TEST-MIB.txt"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  fs::path out = dir / "SNMPKIT-TEST-MIB.cmib";
  ASSERT_TRUE(fs::exists(out));
  mib::Registry reg;
  testsupport::load_corpus(reg);
  std::ifstream in(out);
  EXPECT_EQ(mib::load_compiled(reg, in), "SNMPKIT-TEST-MIB");
  EXPECT_EQ(mib::number_list(reg.resolve("testLabel")), (Oid{1, 3, 6, 1, 4, 1, 99999, 1, 2}));
  fs::remove_all(dir);
}

TEST(Cli, MibcReportsPosition) {
  fs::path dir = temp_dir("bad");
  fs::path src = dir / "BAD-MIB.txt";
  std::ofstream(src) << "BAD-MIB DEFINITIONS ::= BEGIN\n  foo OBJECT IDENTIFIER ::= { iso 3 \nEND\n";
  auto r = run({"mibc", "-o", dir.string(), src.string()});
  EXPECT_EQ(r.code, cli::kSnmpError);
  EXPECT_EQ(r.err.rfind(src.string() + ":3:", 0), 0u) << r.err;
  fs::remove_all(dir);
}

TEST(Cli, MibPathFlagSelectsModules) {
  fs::path dir = temp_dir("path");
  auto r = run({"get", "-M", dir.string(), "127.0.0.1", "sysDescr.0"});
  EXPECT_EQ(r.code, cli::kUsage);
  fs::remove_all(dir);
}

TEST(Cli, AgentCommandServesUntilStopped) {
  std::uint16_t port = net::UdpListener("127.0.0.1", 0).local_port();
  std::ostringstream out, err;
  std::atomic<int> code{-1};
  std::thread t([&] {
    code = cli::run({"agent", "--address", "127.0.0.1", "-p", std::to_string(port), "--descr", "cli agent"}, out, err);
  });
  Result got{};
  for (int i = 0; i < 50 && code == -1; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    got = run({"get", "-t", "0.2", "-r", "2", "127.0.0.1:" + std::to_string(port), "sysDescr.0"});
    if (got.code == cli::kOk) break;
  }
  cli::stop_flag() = true;
  t.join();
  EXPECT_EQ(code.load(), cli::kOk) << err.str();
  EXPECT_EQ(got.out, "SNMPv2-MIB::sysDescr.0 = STRING: cli agent\n");
  EXPECT_NE(out.str().find("listening on 127.0.0.1:" + std::to_string(port)), std::string::npos);
}

TEST(Cli, AgentBindFailureExitsOne) {
  net::UdpListener busy("127.0.0.1", 0);
  auto r = run({"agent", "--address", "127.0.0.1", "-p", std::to_string(busy.local_port())});
  EXPECT_EQ(r.code, cli::kSnmpError);
}

}  // namespace
}  // namespace snmp
