#pragma once

#include <stdexcept>
#include <string>

namespace abx {

/// Raised when a caller violates a documented precondition (dimension
/// mismatch, non-stochastic row, out-of-range index).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A fixed-point iteration hit its iteration cap before reaching tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// History enumeration exceeded its configured capacity.
class CapacityError : public std::runtime_error {
 public:
  CapacityError(const std::string& what, int depth_reached)
      : std::runtime_error(what), depth_reached_(depth_reached) {}
  int depth_reached() const noexcept { return depth_reached_; }

 private:
  int depth_reached_;
};

/// Bayes update conditioned on an observation of probability zero.
class ImpossibleObservationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reading or writing a file failed; the message carries the path.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace abx
