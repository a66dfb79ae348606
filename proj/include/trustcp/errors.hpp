#pragma once

#include <stdexcept>
#include <string>

namespace trustcp {

// Invalid argument or configuration supplied by the caller.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (files, datasets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical routine failed to converge or hit a state that should be
// unreachable for well-posed inputs.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Prefixes the message of an in-flight trustcp exception with a stage name and
// rethrows it as the same type.
[[noreturn]] void rethrow_with_stage(const std::string& stage);

}  // namespace trustcp
