#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "qpaths/rng.hpp"

namespace qpaths {

using Point = Eigen::VectorXd;

/// log pi~(z); finite or -inf, never NaN for finite z.
using LogDensityFn = std::function<double(const Point&)>;
/// Writes grad log pi~(z) into `out` (already sized to dim).
using GradLogDensityFn = std::function<void(const Point&, Point& out)>;
using SamplerFn = std::function<Point(RngStream&)>;

/// An unnormalized (or normalized) density on R^dim.
///
/// Immutable after construction; copies share the underlying callables.
/// Without an analytic gradient, `grad_log_density` falls back to central
/// differences with step 1e-5 * (1 + |z_i|).
class DensityHandle {
 public:
  DensityHandle(int dim, LogDensityFn log_density, GradLogDensityFn grad = {},
                SamplerFn sampler = {}, std::optional<double> log_normalizer = std::nullopt,
                std::string description = {});

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] const std::string& description() const noexcept { return description_; }

  [[nodiscard]] double log_density(const Point& z) const;
  void grad_log_density(const Point& z, Point& out) const;
  [[nodiscard]] Point grad_log_density(const Point& z) const;

  [[nodiscard]] bool has_analytic_gradient() const noexcept { return static_cast<bool>(grad_); }
  [[nodiscard]] bool has_sampler() const noexcept { return static_cast<bool>(sampler_); }
  /// Exact draw from the normalized density. Throws CapabilityError without a sampler.
  [[nodiscard]] Point sample(RngStream& rng) const;

  /// log of the integral of exp(log_density), when known. 0 for normalized handles.
  [[nodiscard]] std::optional<double> log_normalizer() const noexcept { return log_normalizer_; }
  [[nodiscard]] bool is_normalized() const noexcept {
    return log_normalizer_.has_value() && *log_normalizer_ == 0.0;
  }

  /// Same density multiplied by exp(log_c); gradient and sampler are unchanged.
  [[nodiscard]] DensityHandle scaled(double log_c) const;

 private:
  void check_point(const Point& z) const;

  int dim_;
  LogDensityFn log_density_;
  GradLogDensityFn grad_;
  SamplerFn sampler_;
  std::optional<double> log_normalizer_;
  std::string description_;
};

/// A positive-definite matrix, either dense or given by its diagonal.
using MatrixSpec = std::variant<Eigen::VectorXd, Eigen::MatrixXd>;

Eigen::MatrixXd to_dense(const MatrixSpec& m);

struct GaussianSpec {
  Eigen::VectorXd mean;
  MatrixSpec variance;  ///< covariance, not standard deviation

  static GaussianSpec univariate(double mean, double variance);
};

/// Multivariate Student-t with density proportional to
/// [1 + (z - mean)^T scale^{-1} (z - mean) / dof]^{-(dof + d)/2}.
/// `scale` is the matrix in the quadratic form, not the covariance.
struct StudentTSpec {
  Eigen::VectorXd mean;
  MatrixSpec scale;
  double dof = 1.0;

  static StudentTSpec univariate(double mean, double scale, double dof);
};

using DensitySpec = std::variant<GaussianSpec, StudentTSpec>;

/// Normalized Gaussian with analytic gradient and exact sampler.
/// Throws ConstructionError on a non-PD variance or shape mismatch.
DensityHandle make_gaussian(const GaussianSpec& spec);

/// Normalized Student-t with analytic gradient; sampled as mean + L eps / sqrt(chi2_dof / dof).
/// Throws ConstructionError for dof <= 0 or a non-PD scale.
DensityHandle make_student_t(const StudentTSpec& spec);

DensityHandle make_density(const DensitySpec& spec);

[[nodiscard]] int spec_dim(const DensitySpec& spec);

/// Order of the q-exponential family containing Student-t with `nu` dof in `dim` dimensions:
/// q = (nu + d + 2) / (nu + d). Throws DomainError for nu <= 0.
double q_from_nu(double nu, int dim);

/// Inverse of q_from_nu: nu = (d - d q + 2) / (q - 1). Valid for 1 < q < 1 + 2/d;
/// anything else (including q <= 1) throws DomainError.
double nu_from_q(double q, int dim);

}  // namespace qpaths
