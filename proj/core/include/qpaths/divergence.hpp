#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "qpaths/qpath.hpp"

namespace qpaths {

/// Log of an unnormalized 1-d density; -inf encodes zero.
using LogDensity1d = std::function<double(double)>;

/// Nodes and positive weights of a 1-d quadrature rule.
class QuadratureGrid {
 public:
  /// Throws PreconditionError unless points strictly increase, weights are
  /// positive and both lists have the same non-zero length.
  QuadratureGrid(std::vector<double> points, std::vector<double> weights);

  /// Composite Gauss-Legendre: `panels` equal panels of a 16-point rule on [a, b].
  static QuadratureGrid gauss_legendre(double a, double b, std::size_t panels);

  /// 4096 nodes on [-40, 40].
  static QuadratureGrid default_grid();

  /// Symmetric grid on [-half_width, half_width]: `inner_panels` equal panels on
  /// [-1, 1] and `log_panels` geometrically growing panels on each side. For heavy tails.
  static QuadratureGrid log_spaced(double half_width, std::size_t inner_panels,
                                   std::size_t log_panels);

  [[nodiscard]] const std::vector<double>& points() const noexcept { return points_; }
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
  [[nodiscard]] std::size_t size() const noexcept { return points_.size(); }
  [[nodiscard]] double lower() const noexcept { return lower_; }
  [[nodiscard]] double upper() const noexcept { return upper_; }

  /// sum_k w_k exp(log_f(x_k)).
  [[nodiscard]] double integrate(const LogDensity1d& log_f) const;

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  double lower_;
  double upper_;
};

/// Relative tolerance of the mass-capture checks.
inline constexpr double kMassCaptureTolerance = 1e-8;

/// Throws MassCaptureError when the density is still significant at the grid
/// boundary: (f(a) + f(b)) (b - a) > tol * integral. Returns the integral.
double require_mass_captured(const LogDensity1d& log_f, const QuadratureGrid& grid,
                             double tol = kMassCaptureTolerance);

/// Throws MassCaptureError when the grid integral differs from the known total mass by more than tol.
void check_mass_capture(const LogDensity1d& log_f, const QuadratureGrid& grid,
                        double expected_mass, double tol = kMassCaptureTolerance);

/// D_alpha[f : g] = 4/(1 - alpha^2) int [(1-alpha)/2 f + (1+alpha)/2 g - f^{(1-alpha)/2} g^{(1+alpha)/2}].
/// Tends to KL[g : f] as alpha -> 1 and KL[f : g] as alpha -> -1; both limits
/// throw RoutingError and must go through kl_unnormalized.
double alpha_divergence(const LogDensity1d& f, const LogDensity1d& g, double alpha,
                        const QuadratureGrid& grid);

/// Extended KL: int f log(f/g) - int f + int g. +inf when g vanishes where f does not.
double kl_unnormalized(const LogDensity1d& f, const LogDensity1d& g, const QuadratureGrid& grid);

/// (1 - beta) D_alpha[pi~_0 : r~] + beta D_alpha[pi~_T : r~] for a 1-d path.
/// alpha = -1 uses KL[pi~_i : r~], alpha = 1 uses KL[r~ : pi~_i].
double variational_objective(const LogDensity1d& r_log, const QPath& path, double beta,
                             double alpha, const QuadratureGrid& grid);

/// Wraps a 1-d handle as a scalar log-density. Throws PreconditionError if dim != 1.
LogDensity1d as_log_density_1d(const DensityHandle& h);

/// log pi~_beta(x) of a 1-d path.
LogDensity1d path_log_density_1d(const QPath& path, double beta);

}  // namespace qpaths
