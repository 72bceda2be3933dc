#pragma once

#include <stdexcept>
#include <string>

namespace wtgswitch {

// Invalid parameters, inconsistent coefficient sets, malformed config files.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Overflow or blow-up during series recursion or time integration.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Even switching to support at the disturbance instant violates the limit.
class UnsafeEvenWithSupport : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wtgswitch
