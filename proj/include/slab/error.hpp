#pragma once

#include <stdexcept>
#include <string>

namespace slab {

/// Invalid configuration or operation preconditions (bad grid sizes,
/// inadmissible parameters, unknown config keys, ...). CLI maps this to
/// exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure during evaluation (non-finite integrand, degenerate
/// transform input, quadrature breakdown). Carries enough context to locate
/// the offending sample.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace slab
