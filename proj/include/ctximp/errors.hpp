#pragma once

#include <stdexcept>
#include <string>

namespace ctximp {

/// Invalid user configuration (bad flag value, missing option). CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent data (CSV content, distribution files, column
/// designations). CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exact-enumeration size guard was exceeded. CLI exit code 4.
class GuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ctximp
