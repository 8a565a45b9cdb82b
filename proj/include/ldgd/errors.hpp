#pragma once

#include <stdexcept>
#include <string>

namespace ldgd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (shapes, ranges, counts).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A computation produced a non-finite value or a matrix was not
/// positive definite even after the maximum jitter.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// File-system level failure: missing file, unreadable or unwritable path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Content of a file or a configuration is inconsistent with what is
/// expected (dimension mismatch, malformed checkpoint).
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ldgd
