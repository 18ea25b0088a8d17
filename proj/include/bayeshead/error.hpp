#pragma once

#include <stdexcept>
#include <string>

namespace bayeshead {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (files, labels, dimensions).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numeric computation produced a non-finite value.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace bayeshead
