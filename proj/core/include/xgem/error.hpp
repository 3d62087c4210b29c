#pragma once

#include <stdexcept>
#include <string>

namespace xgem {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor extents do not agree with what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A computation produced or received a NaN/Inf, or hit a domain violation
/// such as log of a non-positive entry.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or violated precondition on user input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A trained generator did not pass its reconstruction-error gate.
class GateError : public Error {
 public:
  GateError(const std::string& what, double measured, double threshold)
      : Error(what), measured_(measured), threshold_(threshold) {}

  double measured() const noexcept { return measured_; }
  double threshold() const noexcept { return threshold_; }

 private:
  double measured_;
  double threshold_;
};

/// Equalized-odds recalibration could not satisfy its constraints.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (checkpoints, IDX files, dataset exports).
class FormatError : public Error {
 public:
  enum class Kind { bad_magic, version_mismatch, truncated, count_mismatch, inconsistent, io };

  FormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace xgem
