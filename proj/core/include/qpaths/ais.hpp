#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "qpaths/deformed_math.hpp"
#include "qpaths/hmc.hpp"
#include "qpaths/qpath.hpp"
#include "qpaths/rng.hpp"

namespace qpaths {

/// Fraction of invalid (NaN) chains above which a run fails with NumericalFailure.
inline constexpr double kInvalidChainBudget = 0.01;

struct AisOptions {
  /// Worker threads; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 1;
  bool record_increments = false;
};

struct AisResult {
  std::vector<double> log_weights;  ///< valid chains only, in chain order
  double log_ratio_estimate = 0.0;  ///< log-mean-exp of log_weights
  double mean_log_weight = 0.0;     ///< plain average of log_weights
  double ess = 0.0;
  /// chains x T, only with AisOptions::record_increments; rows of invalid chains keep their NaN.
  Eigen::MatrixXd per_step_log_increments;
  std::size_t n_chains = 0;
  std::size_t n_invalid = 0;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

/// Annealed importance sampling of log Z_T / Z_0 along the path.
///
/// Chain c runs on rng.substream(c): z_0 ~ pi_0, then for t = 1..T the weight
/// gains log pi~_t(z) - log pi~_{t-1}(z) and the state takes
/// transitions_per_temperature HMC steps at beta_t (none after the last weight update,
/// which cannot affect it). Throws CapabilityError without a base sampler and
/// NumericalFailure when more than 1% of chains go NaN.
AisResult run_ais(const QPath& path, const Schedule& schedule, const HmcConfig& cfg,
                  std::size_t n_chains, const RngStream& rng, const AisOptions& options = {});

struct BdmcResult {
  double lower = 0.0;  ///< mean forward log-weight
  double upper = 0.0;  ///< minus the mean reverse log-weight
  double gap = 0.0;    ///< upper - lower
  /// Log-mean-exp versions of the bounds; tighter but far noisier in sign.
  double lower_lme = 0.0;
  double upper_lme = 0.0;
  AisResult forward;
  AisResult reverse;
};

/// Forward AIS from pi_0 and reverse AIS from pi_T along the reflected schedule
/// (on substreams 0 and 1). Both endpoints need exact samplers.
BdmcResult run_bdmc(const QPath& path, const Schedule& schedule, const HmcConfig& cfg,
                    std::size_t n_chains, const RngStream& rng, const AisOptions& options = {});

/// Metropolis kernel with a uniform proposal over the other states, invariant for
/// the distribution proportional to `unnormalized`.
Eigen::MatrixXd metropolis_kernel(const Eigen::VectorXd& unnormalized);

struct DiscreteAisExpectation {
  double expected_weight;  ///< E[w] by exhaustive enumeration
  double direct_ratio;     ///< sum(target) / sum(base)
};

/// Exact expectation of the AIS weight on a finite state space.
///
/// kernels[t-1] is applied at temperature t; each must leave the normalized
/// discrete q-path at beta_t invariant to 1e-12 (PreconditionError naming t
/// otherwise). Limits: 2..8 states, 1..6 steps, strictly positive vectors.
DiscreteAisExpectation enumerate_discrete_ais(const Eigen::VectorXd& unnorm_base,
                                              const Eigen::VectorXd& unnorm_target, QOrder q,
                                              const Schedule& schedule,
                                              const std::vector<Eigen::MatrixXd>& kernels);

/// Unnormalized q-path values at beta on a finite state space.
Eigen::VectorXd discrete_path(const Eigen::VectorXd& unnorm_base,
                              const Eigen::VectorXd& unnorm_target, QOrder q, double beta);

}  // namespace qpaths
