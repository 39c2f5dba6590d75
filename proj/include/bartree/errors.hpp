#pragma once

#include <stdexcept>
#include <string>

namespace bartree {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad parameters, malformed files, violated preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Node id or depth beyond the supported tree capacity.
class CapacityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The data or the model is numerically degenerate (singular systems,
/// non-convergence, loss of positive definiteness).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// The observed tree died out before any statistic could be formed.
class ExtinctionError : public DegeneracyError {
 public:
  using DegeneracyError::DegeneracyError;
};

}  // namespace bartree
