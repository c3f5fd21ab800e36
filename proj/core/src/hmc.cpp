#include "qpaths/hmc.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "qpaths/errors.hpp"

namespace qpaths {

namespace {

// Leapfrog integration in place. `grad` must hold the gradient at z on entry.
// Returns the log-density at the final z, or NaN once the trajectory diverges.
template <class F>
double integrate(F&& value_grad, Point& z, Point& p, Point& grad, double eps, int n,
                 double inv_mass) {
  double value = 0.0;
  p.noalias() += (0.5 * eps) * grad;
  for (int s = 0; s < n; ++s) {
    z.noalias() += (eps * inv_mass) * p;
    value = value_grad(z, grad);
    if (!std::isfinite(value) || !grad.allFinite()) return std::nan("");
    p.noalias() += (s + 1 == n ? 0.5 * eps : eps) * grad;
  }
  return value;
}

}  // namespace

void HmcConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw PreconditionError("hmc.step_size must be positive");
  }
  if (n_leapfrog < 1) throw PreconditionError("hmc.n_leapfrog must be positive");
  if (transitions_per_temperature < 0) {
    throw PreconditionError("hmc.transitions_per_temperature must be non-negative");
  }
  if (!(mass > 0.0) || !std::isfinite(mass)) throw PreconditionError("hmc.mass must be positive");
  if (!(step_jitter >= 0.0 && step_jitter < 1.0)) {
    throw PreconditionError("hmc.step_jitter must lie in [0, 1)");
  }
}

LeapfrogResult leapfrog(const ValueGradFn& value_grad, const Point& z, const Point& p,
                        double step_size, int n_steps, double mass) {
  if (z.size() != p.size()) throw PreconditionError("position and momentum sizes differ");
  if (n_steps < 0) throw PreconditionError("n_steps must be non-negative");
  LeapfrogResult out{z, p, 0.0, false};
  Point grad(z.size());
  out.log_density = value_grad(out.z, grad);
  if (!std::isfinite(out.log_density) || !grad.allFinite()) {
    out.diverged = true;
    return out;
  }
  if (n_steps == 0) return out;
  const double v = integrate(value_grad, out.z, out.p, grad, step_size, n_steps, 1.0 / mass);
  out.diverged = std::isnan(v);
  out.log_density = v;
  return out;
}

double metropolis_acceptance(double log_ratio) noexcept {
  if (std::isnan(log_ratio)) return 0.0;
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

bool metropolis_accept(double log_ratio, RngStream& rng) {
  const double u = rng.uniform();
  return u < metropolis_acceptance(log_ratio);
}

bool hmc_transition(const QPath& path, double beta, Point& z, const HmcConfig& cfg,
                    RngStream& rng, HmcWorkspace& ws) {
  const int d = path.dim();
  ws.p.resize(d);
  ws.grad.resize(d);
  auto value_grad = [&](const Point& x, Point& g) {
    try {
      return path.value_and_gradient(beta, x, g, ws.scratch);
    } catch (const std::domain_error&) {
      // zero density or a NaN endpoint value: both end the trajectory
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  const double start = value_grad(z, ws.grad);
  if (!(start > -std::numeric_limits<double>::infinity())) {
    throw PreconditionError("HMC started where the target density is zero");
  }
  const double inv_mass = 1.0 / cfg.mass;
  const double sd = std::sqrt(cfg.mass);
  for (int i = 0; i < d; ++i) ws.p[i] = sd * rng.normal();
  const double h0 = -start + 0.5 * inv_mass * ws.p.squaredNorm();

  double eps = cfg.step_size;
  if (cfg.step_jitter > 0.0) eps *= 1.0 + cfg.step_jitter * (2.0 * rng.uniform() - 1.0);

  ws.z_new = z;
  const double end = integrate(value_grad, ws.z_new, ws.p, ws.grad, eps,
                               cfg.n_leapfrog, inv_mass);
  // always consume the uniform so the stream position does not depend on divergence
  const double u = rng.uniform();
  if (std::isnan(end)) return false;
  const double h1 = -end + 0.5 * inv_mass * ws.p.squaredNorm();
  if (u < metropolis_acceptance(h0 - h1)) {
    z = ws.z_new;
    return true;
  }
  return false;
}

HmcStep hmc_transition(const QPath& path, double beta, const Point& z, const HmcConfig& cfg,
                       RngStream& rng) {
  HmcWorkspace ws;
  HmcStep out{z, false};
  out.accepted = hmc_transition(path, beta, out.z, cfg, rng, ws);
  return out;
}

}  // namespace qpaths
