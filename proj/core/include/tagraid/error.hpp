#pragma once

#include <stdexcept>
#include <string>

namespace tagraid {

/// Base exception for every recoverable failure raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input data or configuration (bad file rows, unknown keys, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical failure during training or attack optimisation (NaN loss, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace tagraid
