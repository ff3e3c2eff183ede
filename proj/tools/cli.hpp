#pragma once

#include <atomic>
#include <ostream>
#include <string>
#include <vector>

namespace snmp::cli {

enum ExitCode : int {
  kOk = 0,
  kSnmpError = 1,
  kTimeout = 2,
  kUsage = 3,
};

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Set to make a running `agent` command shut down.
std::atomic<bool>& stop_flag();

}  // namespace snmp::cli
