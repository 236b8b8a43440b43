#pragma once

#include <stdexcept>
#include <string>

namespace pssim {

// Invalid configuration or parameter input. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failure while running: integrator breakdown, invariant breach, budget
// exceeded. The CLI maps this to exit code 2.
class RuntimeFailure : public std::runtime_error {
 public:
  explicit RuntimeFailure(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pssim
