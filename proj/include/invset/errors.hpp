#pragma once

#include <stdexcept>
#include <string>

namespace invset {

/// Malformed call: wrong dimensions, empty inputs, out-of-range scalars.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration (unknown names, unsupported combinations,
/// violated modelling assumptions such as non-unisolvent points).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The numerical core gave up (iteration cap, factorization breakdown).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Infeasible / unbounded problems and degenerate estimates.
class DegenerateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace invset
