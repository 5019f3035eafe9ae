#pragma once

#include <stdexcept>
#include <string>

namespace pcad {

/// Bad argument shape or value supplied by the caller.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data that violates a container invariant (non-finite coordinates,
/// mismatched mask length, malformed files).
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent or unsupported configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dataset or file I/O failure. Messages carry the offending path.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite loss or other numerical breakdown during training/inference.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A vector that must be normalized has zero length.
class DegenerateNorm : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// A metric that is undefined for the given labels (e.g. single-class AUROC).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace pcad
