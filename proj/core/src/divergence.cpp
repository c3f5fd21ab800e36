#include "qpaths/divergence.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "qpaths/errors.hpp"

namespace qpaths {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNegInf = -kInf;
constexpr std::size_t kRuleOrder = 16;

using Rule = boost::math::quadrature::gauss<double, kRuleOrder>;

// Appends the 16-point rule mapped onto [a, b].
void append_panel(double a, double b, std::vector<double>& x, std::vector<double>& w) {
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  // Boost stores the non-negative half of a symmetric rule; 16 is even so 0 is not a node.
  for (std::size_t i = abscissa.size(); i-- > 0;) {
    x.push_back(mid - half * abscissa[i]);
    w.push_back(half * weights[i]);
  }
  for (std::size_t i = 0; i < abscissa.size(); ++i) {
    x.push_back(mid + half * abscissa[i]);
    w.push_back(half * weights[i]);
  }
}

void check_alpha(double alpha) {
  if (!std::isfinite(alpha)) throw DomainError("alpha must be finite");
  if (alpha == 1.0 || alpha == -1.0) {
    throw RoutingError("alpha = +-1 is the KL limit; call kl_unnormalized instead");
  }
}

}  // namespace

QuadratureGrid::QuadratureGrid(std::vector<double> points, std::vector<double> weights)
    : points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.empty() || points_.size() != weights_.size()) {
    throw PreconditionError("quadrature points and weights must be non-empty and of equal length");
  }
  for (std::size_t k = 0; k < points_.size(); ++k) {
    if (!std::isfinite(points_[k]) || !(weights_[k] > 0.0) || !std::isfinite(weights_[k])) {
      throw PreconditionError("quadrature nodes must be finite with positive weights");
    }
    if (k > 0 && !(points_[k] > points_[k - 1])) {
      throw PreconditionError("quadrature points must be strictly increasing");
    }
  }
  lower_ = points_.front();
  upper_ = points_.back();
}

QuadratureGrid QuadratureGrid::gauss_legendre(double a, double b, std::size_t panels) {
  if (!(b > a) || panels == 0) throw PreconditionError("need a < b and at least one panel");
  std::vector<double> x;
  std::vector<double> w;
  x.reserve(panels * kRuleOrder);
  w.reserve(panels * kRuleOrder);
  const double h = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double hi = p + 1 == panels ? b : a + h * static_cast<double>(p + 1);
    append_panel(lo, hi, x, w);
  }
  QuadratureGrid grid(std::move(x), std::move(w));
  grid.lower_ = a;
  grid.upper_ = b;
  return grid;
}

QuadratureGrid QuadratureGrid::default_grid() { return gauss_legendre(-40.0, 40.0, 256); }

QuadratureGrid QuadratureGrid::log_spaced(double half_width, std::size_t inner_panels,
                                          std::size_t log_panels) {
  if (!(half_width > 1.0) || inner_panels == 0 || log_panels == 0) {
    throw PreconditionError("log-spaced grid needs half_width > 1 and positive panel counts");
  }
  std::vector<double> edges;
  const double ratio = std::pow(half_width, 1.0 / static_cast<double>(log_panels));
  for (std::size_t p = log_panels; p > 0; --p) {
    edges.push_back(-std::pow(ratio, static_cast<double>(p)));
  }
  for (std::size_t p = 0; p <= inner_panels; ++p) {
    edges.push_back(-1.0 + 2.0 * static_cast<double>(p) / static_cast<double>(inner_panels));
  }
  for (std::size_t p = 1; p <= log_panels; ++p) {
    edges.push_back(std::pow(ratio, static_cast<double>(p)));
  }
  edges.front() = -half_width;
  edges.back() = half_width;
  std::vector<double> x;
  std::vector<double> w;
  for (std::size_t e = 0; e + 1 < edges.size(); ++e) append_panel(edges[e], edges[e + 1], x, w);
  QuadratureGrid grid(std::move(x), std::move(w));
  grid.lower_ = -half_width;
  grid.upper_ = half_width;
  return grid;
}

double QuadratureGrid::integrate(const LogDensity1d& log_f) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < points_.size(); ++k) {
    const double l = log_f(points_[k]);
    if (std::isnan(l)) throw DomainError("log-density is NaN on the grid");
    acc += weights_[k] * std::exp(l);
  }
  return acc;
}

double require_mass_captured(const LogDensity1d& log_f, const QuadratureGrid& grid, double tol) {
  const double mass = grid.integrate(log_f);
  if (!std::isfinite(mass)) throw MassCaptureError("density integral is not finite on the grid");
  const double edge = (std::exp(log_f(grid.lower())) + std::exp(log_f(grid.upper()))) *
                      (grid.upper() - grid.lower());
  if (edge > tol * mass) {
    std::ostringstream os;
    os << "grid [" << grid.lower() << ", " << grid.upper()
       << "] does not capture the density: boundary mass estimate " << edge << " vs total " << mass;
    throw MassCaptureError(os.str());
  }
  return mass;
}

void check_mass_capture(const LogDensity1d& log_f, const QuadratureGrid& grid,
                        double expected_mass, double tol) {
  const double mass = grid.integrate(log_f);
  if (!(std::abs(mass - expected_mass) <= tol * std::max(1.0, std::abs(expected_mass)))) {
    std::ostringstream os;
    os << "grid integral " << mass << " differs from expected mass " << expected_mass;
    throw MassCaptureError(os.str());
  }
}

double alpha_divergence(const LogDensity1d& f, const LogDensity1d& g, double alpha,
                        const QuadratureGrid& grid) {
  check_alpha(alpha);
  require_mass_captured(f, grid);
  require_mass_captured(g, grid);
  const double a = 0.5 * (1.0 - alpha);
  const double b = 0.5 * (1.0 + alpha);
  const auto& x = grid.points();
  const auto& w = grid.weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lf = f(x[k]);
    const double lg = g(x[k]);
    const double ef = std::exp(lf);
    const double eg = std::exp(lg);
    double cross;
    if (lf == lg) {
      cross = ef;
    } else if (lf == kNegInf || lg == kNegInf) {
      // zero to a positive power vanishes; to the zeroth power the other factor survives whole
      const double zero_power = lf == kNegInf ? a : b;
      if (zero_power < 0.0) return kInf;
      cross = zero_power > 0.0 ? 0.0 : (lf == kNegInf ? eg : ef);
    } else {
      cross = std::exp(a * lf + b * lg);
    }
    acc += w[k] * (a * ef + b * eg - cross);
  }
  return 4.0 / (1.0 - alpha * alpha) * acc;
}

double kl_unnormalized(const LogDensity1d& f, const LogDensity1d& g, const QuadratureGrid& grid) {
  require_mass_captured(f, grid);
  require_mass_captured(g, grid);
  const auto& x = grid.points();
  const auto& w = grid.weights();
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double lf = f(x[k]);
    const double lg = g(x[k]);
    const double ef = std::exp(lf);
    const double eg = std::exp(lg);
    if (ef == 0.0) {
      acc += w[k] * eg;
      continue;
    }
    if (lg == kNegInf) return kInf;
    acc += w[k] * (ef * (lf - lg) - ef + eg);
  }
  return acc;
}

double variational_objective(const LogDensity1d& r_log, const QPath& path, double beta,
                             double alpha, const QuadratureGrid& grid) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw PreconditionError("beta must lie in [0, 1]");
  const LogDensity1d p0 = as_log_density_1d(path.base());
  const LogDensity1d p1 = as_log_density_1d(path.target());
  auto term = [&](const LogDensity1d& p) {
    if (alpha == -1.0) return kl_unnormalized(p, r_log, grid);
    if (alpha == 1.0) return kl_unnormalized(r_log, p, grid);
    return alpha_divergence(p, r_log, alpha, grid);
  };
  double out = 0.0;
  if (beta < 1.0) out += (1.0 - beta) * term(p0);
  if (beta > 0.0) out += beta * term(p1);
  return out;
}

LogDensity1d as_log_density_1d(const DensityHandle& h) {
  if (h.dim() != 1) throw PreconditionError("1-d quadrature needs a 1-d density");
  return [h](double x) {
    Point z(1);
    z[0] = x;
    return h.log_density(z);
  };
}

LogDensity1d path_log_density_1d(const QPath& path, double beta) {
  if (path.dim() != 1) throw PreconditionError("1-d quadrature needs a 1-d path");
  return [path, beta](double x) {
    Point z(1);
    z[0] = x;
    return path.log_density_at(beta, z);
  };
}

}  // namespace qpaths
