#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace flatmin {

/// Thrown when a caller breaks a documented precondition (dimension mismatch,
/// out-of-range hyperparameter, malformed scenario).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A NaN or Inf was handed to an operation that requires finite input.
class NonFiniteInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A computation produced a non-finite value. Carries the step index at which
/// it happened when one is meaningful.
class NonFiniteState : public std::runtime_error {
 public:
  NonFiniteState(const std::string& what, std::optional<std::int64_t> step = std::nullopt)
      : std::runtime_error(step ? what + " (step " + std::to_string(*step) + ")" : what),
        step_(step) {}

  std::optional<std::int64_t> step() const noexcept { return step_; }

 private:
  std::optional<std::int64_t> step_;
};

/// Configuration could not be parsed or validated. `field` is a JSON-pointer
/// style path to the offending entry, empty when the error is syntactic.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace flatmin
