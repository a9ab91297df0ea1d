#pragma once

#include <stdexcept>
#include <string>

namespace gpnd {

/// Malformed, missing or inconsistent input data (files, datasets, models).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or a numerically degenerate fit.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gpnd
