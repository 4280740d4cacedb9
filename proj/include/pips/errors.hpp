#pragma once

#include <stdexcept>
#include <string>

namespace pips {

// Invalid configuration or argument; maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Factorization failure or other unrecoverable numerics; exit code 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// File could not be read, written or parsed; exit code 4.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

void log_warning(const std::string& message);
void set_quiet(bool quiet);

}  // namespace pips
