#pragma once

#include <stdexcept>
#include <string>

namespace latentpath {

/// Bad input: malformed files, unknown names, violated preconditions.
/// The CLI maps these to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: singular designs, zero variance, too many failed
/// bootstrap replicates. The CLI maps these to exit code 2.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace latentpath
