#pragma once

#include <stdexcept>
#include <string>

namespace lpball {

// Argument outside the mathematical domain of a function (negative moment
// order, invalid covariance, empty sample, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Valid arguments, but a parameter combination the requested object is not
// defined for (q == p for the CLT covariance, p == inf for Gumbel norms, ...).
class RegimeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Configuration or command-line input that cannot be interpreted. `field`
// names the offending key so front ends can report it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// An iterative solver ran out of budget. Carries the best value reached so
// callers can still report a bound.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double best_value)
      : std::runtime_error(what), best_value_(best_value) {}

  [[nodiscard]] double best_value() const noexcept { return best_value_; }

 private:
  double best_value_;
};

}  // namespace lpball
