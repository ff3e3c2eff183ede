#include <csignal>
#include <iostream>

#include "cli.hpp"

namespace {

void on_signal(int) { snmp::cli::stop_flag() = true; }

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::vector<std::string> args(argv + 1, argv + argc);
  return snmp::cli::run(args, std::cout, std::cerr);
}
