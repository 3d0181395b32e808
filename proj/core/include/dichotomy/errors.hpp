#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dichotomy {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A documented precondition on an argument does not hold.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// User supplied input (usually a configuration) is malformed or inconsistent.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A computation could not reach its accuracy or stability target.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class RankCollapseError : public NumericalError {
 public:
  RankCollapseError(const std::string& message, double smallest_singular_value)
      : NumericalError(message), smallest_singular_value_(smallest_singular_value) {}

  double smallest_singular_value() const noexcept { return smallest_singular_value_; }

 private:
  double smallest_singular_value_;
};

class StiffnessError : public NumericalError {
 public:
  StiffnessError(const std::string& message, double time)
      : NumericalError(message), time_(time) {}

  /// Integration time at which the step size underflowed.
  double time() const noexcept { return time_; }

 private:
  double time_;
};

class HyperbolicityLossError : public NumericalError {
 public:
  HyperbolicityLossError(const std::string& message, double residual)
      : NumericalError(message), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class RefinementNeededError : public NumericalError {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  RefinementNeededError(const std::string& message, std::vector<Edge> edges)
      : NumericalError(message), edges_(std::move(edges)) {}

  const std::vector<Edge>& edges() const noexcept { return edges_; }

 private:
  std::vector<Edge> edges_;
};

}  // namespace dichotomy
