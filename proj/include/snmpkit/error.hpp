#pragma once

#include <stdexcept>
#include <string>

namespace snmp {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed arguments that violate an operation's contract.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace snmp
