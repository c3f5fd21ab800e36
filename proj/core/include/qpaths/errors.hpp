#pragma once

#include <stdexcept>
#include <string>

namespace qpaths {

/// Argument outside the mathematical domain of a function (u <= 0 for ln_q, NaN, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller violated a documented precondition (sizes, weight sums, beta range, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A density specification could not be turned into a handle (non-PD matrix, dof <= 0).
class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A handle lacks a capability the operation needs (exact sampler, known normalizer).
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A denominator such as 1 + (1-q) * sum vanished or went negative.
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The q-path log-density is -inf at the point, so its gradient does not exist.
class GradientUndefinedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// alpha = +-1 must go through kl_unnormalized.
class RoutingError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The quadrature grid does not capture the mass of a density it is asked to integrate.
class MassCaptureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too many AIS chains produced NaN increments.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment configuration. `field()` names the offending key path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace qpaths
