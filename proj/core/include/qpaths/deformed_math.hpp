#pragma once

#include <span>

namespace qpaths {

/// |q - 1| below this threshold takes the logarithmic (q = 1) branch.
inline constexpr double kQBranchEpsilon = 1e-9;

/// Order parameter of the deformed logarithm / power mean.
///
/// Always finite. `one_minus()` is the exponent 1 - q used throughout; when
/// `is_log_branch()` holds every operation uses its log/exp limit instead of
/// the deformed formula.
class QOrder {
 public:
  /// Throws DomainError for non-finite q.
  explicit QOrder(double q);

  [[nodiscard]] double value() const noexcept { return q_; }
  [[nodiscard]] double one_minus() const noexcept { return 1.0 - q_; }
  [[nodiscard]] bool is_log_branch() const noexcept;

  /// q = (1 + alpha) / 2.
  static QOrder from_alpha(double alpha);
  [[nodiscard]] double alpha() const noexcept { return 2.0 * q_ - 1.0; }

  friend bool operator==(const QOrder&, const QOrder&) = default;

 private:
  double q_;
};

/// Deformed logarithm (u^{1-q} - 1) / (1 - q); log u on the q = 1 branch.
double ln_q(double u, QOrder q);

/// Deformed exponential [1 + (1-q) u]_+^{1/(1-q)}; exp u on the q = 1 branch.
///
/// The clamp returns exactly 0 for q < 1. For q > 1 the exponent is negative
/// and a non-positive base is the pole of the function: +inf is returned.
double exp_q(double u, QOrder q);

/// log(exp_q(u)), computed without leaving the log domain. -inf when the
/// clamp is active (q < 1), +inf past the pole (q > 1).
double log_exp_q(double u, QOrder q);

/// Weighted power mean (sum_i w_i u_i^{1-q})^{1/(1-q)}; geometric mean at q = 1.
///
/// Weights must be non-negative and sum to 1 within 1e-12; values must be > 0.
double power_mean(std::span<const double> weights, std::span<const double> values, QOrder q);

/// log(power_mean(w, exp(log_values), q)) with a max-shift reduction in the
/// (1-q) log domain.
///
/// -inf entries encode zero values: with q < 1 they drop out of the sum; with
/// q > 1 (or q = 1) a -inf entry carrying positive weight makes the result -inf.
double log_power_mean(std::span<const double> weights, std::span<const double> log_values,
                      QOrder q);

/// Relative errors of the q-exponential sum and product identities for one input.
struct QIdentityResiduals {
  double sum_identity;
  double product_identity;
};

/// Evaluates both sides of
///   exp_q(sum x_n)      = prod exp_q(x_n / (1 + (1-q) sum_{i<n} x_i))
///   prod exp_q(x_n)     = exp_q(sum x_n prod_{i<n} (1 + (1-q) x_i))
/// and returns their relative errors. Throws DegenerateInputError when a
/// denominator 1 + (1-q) sum_{i<n} x_i vanishes.
QIdentityResiduals q_identity_residuals(std::span<const double> xs, QOrder q);

/// True iff both identity residuals are <= tol.
bool verify_q_identities(std::span<const double> xs, QOrder q, double tol);

}  // namespace qpaths
