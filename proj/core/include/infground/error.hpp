#pragma once

#include <stdexcept>
#include <string>

namespace infground {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numeric argument is outside the range an operation accepts.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// The domain (or the part of it an operation needs) has no interior nodes.
class EmptyDomain : public Error {
 public:
  using Error::Error;
};

/// A grid or buffer would exceed a configured budget.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// Division by an identically-zero field.
class ZeroField : public Error {
 public:
  using Error::Error;
};

/// File-system failure while exporting results.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace infground
