#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "snmpkit/smi.hpp"

namespace snmp::testsupport {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string mib_source(const std::string& module) {
  return read_file(std::string(SNMPKIT_MIB_SOURCE_DIR) + "/" + module + ".txt");
}

inline const char* const kCorpus[] = {"SNMPv2-SMI", "SNMPv2-TC", "SNMPv2-CONF",
                                      "SNMPv2-MIB", "IF-MIB",    "LISP-MIB"};

/// Compiles and loads the bundled MIB corpus from source.
inline void load_corpus(mib::Registry& registry) {
  for (const char* module : kCorpus) mib::load_compiled(registry, mib::compile(mib_source(module)));
}

}  // namespace snmp::testsupport
