#pragma once

#include <stdexcept>
#include <string>

namespace cfrechet {

/// Malformed or inconsistent input: bad files, mismatched dimensions,
/// invalid weights, out-of-domain parameters. CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-convergence, matrices outside the PSD tolerance,
/// solver iteration caps. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cfrechet
