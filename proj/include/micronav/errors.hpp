#pragma once

#include <stdexcept>
#include <string>

namespace micronav {

// Bad configuration: thresholds, scenario parameters, experiment setup.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or inconsistent input data: CSV schemas, rows, joins.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace micronav
