#pragma once

#include <functional>

#include "qpaths/qpath.hpp"
#include "qpaths/rng.hpp"

namespace qpaths {

struct HmcConfig {
  double step_size = 1.4;
  int n_leapfrog = 10;
  /// HMC transitions applied at each intermediate temperature. 0 freezes the chain.
  int transitions_per_temperature = 2;
  double mass = 1.0;
  /// Each transition draws its step uniformly from step_size * [1 - jitter, 1 + jitter].
  /// Breaks the resonance of a fixed trajectory length on near-Gaussian targets.
  double step_jitter = 0.3;

  /// Throws PreconditionError naming the offending field.
  void validate() const;
};

/// Returns log pi~(z) and writes its gradient into `grad`. -inf marks zero density.
using ValueGradFn = std::function<double(const Point& z, Point& grad)>;

struct LeapfrogResult {
  Point z;
  Point p;
  double log_density = 0.0;
  bool diverged = false;
};

/// n_steps leapfrog steps of size step_size for H(z, p) = -log pi~(z) + |p|^2 / (2 mass).
/// Stops early with diverged = true on a non-finite density or gradient.
LeapfrogResult leapfrog(const ValueGradFn& value_grad, const Point& z, const Point& p,
                        double step_size, int n_steps, double mass = 1.0);

/// min(1, exp(log_ratio)); NaN counts as 0. Shared with the discrete Metropolis kernels.
double metropolis_acceptance(double log_ratio) noexcept;

/// Draws one uniform and accepts with probability metropolis_acceptance(log_ratio).
bool metropolis_accept(double log_ratio, RngStream& rng);

/// Reusable buffers so repeated transitions do not allocate.
struct HmcWorkspace {
  Point z_new;
  Point p;
  Point grad;
  GradientScratch scratch;
};

/// One Metropolis-corrected HMC transition targeting pi_beta, updating z in place.
/// Returns true on acceptance. Throws PreconditionError when pi~_beta(z) = 0.
/// A diverged trajectory is a rejection.
bool hmc_transition(const QPath& path, double beta, Point& z, const HmcConfig& cfg,
                    RngStream& rng, HmcWorkspace& ws);

struct HmcStep {
  Point z;
  bool accepted;
};

HmcStep hmc_transition(const QPath& path, double beta, const Point& z, const HmcConfig& cfg,
                       RngStream& rng);

}  // namespace qpaths
