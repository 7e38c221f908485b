#pragma once

#include <stdexcept>
#include <string>

namespace splitlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or layer shapes do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An argument or input record violates a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A party broke the message protocol (stale cache, forbidden payload,
/// unknown participant, mismatched row counts).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN or Inf where a finite result is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for the given input (e.g. AUROC with one class).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace splitlab
