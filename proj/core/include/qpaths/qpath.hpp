#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qpaths/deformed_math.hpp"
#include "qpaths/densities.hpp"
#include "qpaths/rng.hpp"

namespace qpaths {

/// Annealing schedule 0 = beta_0 < beta_1 < ... < beta_T = 1.
class Schedule {
 public:
  /// Throws PreconditionError unless the invariants hold.
  explicit Schedule(std::vector<double> betas);

  [[nodiscard]] const std::vector<double>& betas() const noexcept { return betas_; }
  /// Number of annealing steps T (one less than the number of betas).
  [[nodiscard]] std::size_t steps() const noexcept { return betas_.size() - 1; }
  [[nodiscard]] double operator[](std::size_t t) const { return betas_[t]; }

  /// Schedule for the swapped path: beta'_t = 1 - beta_{T-t}.
  [[nodiscard]] Schedule reflected() const;

 private:
  std::vector<double> betas_;
};

/// Linearly spaced schedule (0, 1/T, ..., 1). Throws PreconditionError for T = 0.
Schedule linear_schedule(std::size_t T);

/// Scratch buffers for QPath::value_and_gradient, reused across calls.
struct GradientScratch {
  Point base_grad;
  Point target_grad;
};

/// Power-mean (q-path) interpolation between a base and a target density:
///
///   pi~_beta(z) = [(1 - beta) pi~_0(z)^{1-q} + beta pi~_T(z)^{1-q}]^{1/(1-q)}
///
/// with the geometric mixture on the q = 1 branch. Intermediate densities are
/// only ever evaluated unnormalized. beta outside [0, 1] is rejected.
class QPath {
 public:
  QPath(DensityHandle base, DensityHandle target, QOrder q);

  [[nodiscard]] const DensityHandle& base() const noexcept { return base_; }
  [[nodiscard]] const DensityHandle& target() const noexcept { return target_; }
  [[nodiscard]] QOrder q() const noexcept { return q_; }
  [[nodiscard]] int dim() const noexcept { return base_.dim(); }

  /// log pi~_beta(z). beta = 0 and beta = 1 return the endpoint log-density unchanged.
  [[nodiscard]] double log_density_at(double beta, const Point& z) const;

  /// Combines endpoint log-densities exactly as log_density_at does.
  [[nodiscard]] double combine(double beta, double base_log, double target_log) const;

  /// grad log pi~_beta(z) = r_0 grad l_0 + r_1 grad l_1 with responsibilities
  /// r_i proportional to w_i pi~_i^{1-q}. Throws GradientUndefinedError where the density is 0.
  [[nodiscard]] Point grad_log_density_at(double beta, const Point& z) const;

  /// Log-density and gradient in one pass; the returned value equals log_density_at.
  double value_and_gradient(double beta, const Point& z, Point& grad,
                            GradientScratch& scratch) const;

  /// phi_q(z) = ln_q(pi~_T(z) / pi~_0(z)), evaluated from the log-ratio.
  /// Throws DomainError where the base density is zero.
  [[nodiscard]] double sufficient_statistic(const Point& z) const;

  /// log[pi~_0(z) exp_q(beta phi_q(z))]: the q-exponential-family form of the path,
  /// equal to log_density_at(beta, z) wherever the base density is positive.
  [[nodiscard]] double q_exp_form_check(double beta, const Point& z) const;

  /// Same path with endpoints swapped; reversed().log_density_at(1 - beta, z) is this path at beta.
  [[nodiscard]] QPath reversed() const;

 private:
  static void check_beta(double beta);

  DensityHandle base_;
  DensityHandle target_;
  QOrder q_;
};

struct PartitionEstimate {
  double log_z = 0.0;
  double std_error = 0.0;  ///< standard error of log_z (delta method)
  std::size_t n_samples = 0;
  double ess = 0.0;
};

/// Monte Carlo estimate of log Z_beta = log int pi~_beta via
/// Z_beta = Z_0 E_{pi_0}[exp_q(beta phi_q(z))]. Needs a base with exact
/// sampler and known normalizer (CapabilityError otherwise).
PartitionEstimate estimate_partition(const QPath& path, double beta, std::size_t n_samples,
                                     RngStream& rng);

struct BetaParameterization {
  double beta;
  double log_z;
};

struct ThetaParameterization {
  double theta;
  double psi;
};

/// Maps (theta, psi_q) of pi_0 exp_q(theta phi - psi_q) to the multiplicative form
/// pi_0 exp_q(beta phi) / Z: beta = theta / (1 - (1-q) psi_q), log Z = -log exp_q(-psi_q).
/// Throws DegenerateInputError when 1 - (1-q) psi_q <= 0.
BetaParameterization reparameterize_theta_to_beta(double theta, double psi, QOrder q);

/// Inverse of reparameterize_theta_to_beta.
ThetaParameterization reparameterize_beta_to_theta(double beta, double log_z, QOrder q);

enum class ParametricFamily {
  kGaussianGeometric,  ///< Gaussian endpoints, q = 1
  kStudentTQ,          ///< Student-t endpoints sharing nu, q = q_from_nu(nu, d)
};

/// Family member whose natural parameter is (1 - beta) theta_0 + beta theta_1.
///
/// Gaussian: precision and precision-times-mean interpolate linearly.
/// Student-t: pi^{1-q} is a quadratic in z; its coefficients (each endpoint's
/// normalizer included) interpolate linearly and are mapped back to (mean, scale).
DensitySpec interpolated_member(ParametricFamily family, const DensitySpec& spec0,
                                const DensitySpec& spec1, QOrder q, double beta);

/// max over grid of |log pi~_beta(z) - log(c * member(z))|, with c fitted at
/// the grid midpoint. Throws PreconditionError for mismatched families or q.
double interpolated_member_check(ParametricFamily family, const DensitySpec& spec0,
                                 const DensitySpec& spec1, QOrder q, double beta,
                                 std::span<const Point> grid);

}  // namespace qpaths
