#pragma once

#include <stdexcept>
#include <string>

namespace eigenforge {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double reached)
      : Error(what), reached_(reached) {}

  /// Residual / off-diagonal norm the iteration ended at.
  double reached() const { return reached_; }

 private:
  double reached_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// manifest.json is unparsable or misses required keys.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

/// A raw array file has a byte length different from its declared shape.
class LengthMismatch : public IoError {
 public:
  using IoError::IoError;
};

class VersionMismatch : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace eigenforge
