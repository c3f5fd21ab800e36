#include "qpaths/ais.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "qpaths/errors.hpp"
#include "qpaths/log_weights.hpp"

namespace qpaths {

namespace {

struct ChainOutcome {
  double log_weight = 0.0;
  bool valid = true;
  std::size_t accepted = 0;
  std::size_t proposed = 0;
};

ChainOutcome run_chain(const QPath& path, const Schedule& schedule, const HmcConfig& cfg,
                       RngStream rng, HmcWorkspace& ws, double* increments,
                       std::ptrdiff_t increment_stride) {
  ChainOutcome out;
  Point z = path.base().sample(rng);
  const std::size_t T = schedule.steps();
  for (std::size_t t = 1; t <= T; ++t) {
    const double l0 = path.base().log_density(z);
    const double l1 = path.target().log_density(z);
    double inc;
    try {
      inc = path.combine(schedule[t], l0, l1) - path.combine(schedule[t - 1], l0, l1);
    } catch (const DomainError&) {
      inc = std::nan("");
    }
    if (increments != nullptr) increments[static_cast<std::ptrdiff_t>(t - 1) * increment_stride] = inc;
    if (std::isnan(inc)) {
      out.valid = false;
      out.log_weight = inc;
      return out;
    }
    out.log_weight += inc;
    if (t == T) break;
    for (int k = 0; k < cfg.transitions_per_temperature; ++k) {
      out.accepted += hmc_transition(path, schedule[t], z, cfg, rng, ws) ? 1 : 0;
      ++out.proposed;
    }
  }
  if (std::isnan(out.log_weight)) out.valid = false;
  return out;
}

unsigned resolve_threads(unsigned requested, std::size_t work) {
  unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  if (work < n) n = static_cast<unsigned>(std::max<std::size_t>(work, 1));
  return n;
}

}  // namespace

AisResult run_ais(const QPath& path, const Schedule& schedule, const HmcConfig& cfg,
                  std::size_t n_chains, const RngStream& rng, const AisOptions& options) {
  cfg.validate();
  if (n_chains == 0) throw PreconditionError("n_chains must be positive");
  if (!path.base().has_sampler()) throw CapabilityError("AIS needs an exact sampler for the base");

  const std::size_t T = schedule.steps();
  AisResult result;
  result.n_chains = n_chains;
  result.seed = rng.seed();
  result.stream_id = rng.stream_id();
  if (options.record_increments) {
    result.per_step_log_increments.setZero(static_cast<Eigen::Index>(n_chains),
                                           static_cast<Eigen::Index>(T));
  }

  std::vector<ChainOutcome> outcomes(n_chains);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    HmcWorkspace ws;
    for (std::size_t c = next++; c < n_chains; c = next++) {
      try {
        double* inc = nullptr;
        std::ptrdiff_t stride = 0;
        if (options.record_increments) {
          inc = &result.per_step_log_increments(static_cast<Eigen::Index>(c), 0);
          stride = result.per_step_log_increments.outerStride();
        }
        outcomes[c] = run_chain(path, schedule, cfg, rng.substream(c), ws, inc, stride);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_chains;
      }
    }
  };
  const unsigned n_threads = resolve_threads(options.threads, n_chains);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t accepted = 0;
  std::size_t proposed = 0;
  result.log_weights.reserve(n_chains);
  for (const ChainOutcome& o : outcomes) {
    accepted += o.accepted;
    proposed += o.proposed;
    if (o.valid) {
      result.log_weights.push_back(o.log_weight);
    } else {
      ++result.n_invalid;
    }
  }
  if (static_cast<double>(result.n_invalid) > kInvalidChainBudget * static_cast<double>(n_chains) ||
      result.log_weights.empty()) {
    std::ostringstream os;
    os << result.n_invalid << " of " << n_chains << " AIS chains produced NaN log-weights";
    throw NumericalFailure(os.str());
  }
  result.acceptance_rate = proposed == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(proposed);
  result.log_ratio_estimate = log_mean_exp(result.log_weights);
  double sum = 0.0;
  for (double w : result.log_weights) sum += w;
  result.mean_log_weight = sum / static_cast<double>(result.log_weights.size());
  result.ess = effective_sample_size(result.log_weights);
  return result;
}

BdmcResult run_bdmc(const QPath& path, const Schedule& schedule, const HmcConfig& cfg,
                    std::size_t n_chains, const RngStream& rng, const AisOptions& options) {
  if (!path.target().has_sampler()) {
    throw CapabilityError("BDMC needs an exact sampler for the target");
  }
  BdmcResult out;
  out.forward = run_ais(path, schedule, cfg, n_chains, rng.substream(0), options);
  out.reverse = run_ais(path.reversed(), schedule.reflected(), cfg, n_chains, rng.substream(1), options);
  out.lower = out.forward.mean_log_weight;
  out.upper = -out.reverse.mean_log_weight;
  out.gap = out.upper - out.lower;
  out.lower_lme = out.forward.log_ratio_estimate;
  out.upper_lme = -out.reverse.log_ratio_estimate;
  return out;
}

Eigen::MatrixXd metropolis_kernel(const Eigen::VectorXd& unnormalized) {
  const Eigen::Index n = unnormalized.size();
  if (n < 2) throw PreconditionError("Metropolis kernel needs at least two states");
  if (!(unnormalized.array() > 0.0).all() || !unnormalized.allFinite()) {
    throw PreconditionError("Metropolis kernel needs strictly positive finite masses");
  }
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
  const double propose = 1.0 / static_cast<double>(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double stay = 1.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      k(i, j) = propose * metropolis_acceptance(std::log(unnormalized[j]) - std::log(unnormalized[i]));
      stay -= k(i, j);
    }
    k(i, i) = stay;
  }
  return k;
}

Eigen::VectorXd discrete_path(const Eigen::VectorXd& unnorm_base,
                              const Eigen::VectorXd& unnorm_target, QOrder q, double beta) {
  if (unnorm_base.size() != unnorm_target.size()) throw PreconditionError("state counts differ");
  const DensityHandle dummy(1, [](const Point&) { return 0.0; });
  const QPath path(dummy, dummy, q);
  Eigen::VectorXd out(unnorm_base.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = std::exp(path.combine(beta, std::log(unnorm_base[i]), std::log(unnorm_target[i])));
  }
  return out;
}

DiscreteAisExpectation enumerate_discrete_ais(const Eigen::VectorXd& unnorm_base,
                                              const Eigen::VectorXd& unnorm_target, QOrder q,
                                              const Schedule& schedule,
                                              const std::vector<Eigen::MatrixXd>& kernels) {
  const Eigen::Index n = unnorm_base.size();
  const std::size_t T = schedule.steps();
  if (n < 2 || n > 8) throw PreconditionError("enumeration supports 2..8 states");
  if (T > 6) throw PreconditionError("enumeration supports at most 6 steps");
  if (unnorm_target.size() != n) throw PreconditionError("base and target sizes differ");
  if (!(unnorm_base.array() > 0.0).all() || !(unnorm_target.array() > 0.0).all()) {
    throw PreconditionError("discrete densities must be strictly positive");
  }
  if (kernels.size() != T) throw PreconditionError("need exactly one kernel per annealing step");

  std::vector<Eigen::VectorXd> levels(T + 1);
  for (std::size_t t = 0; t <= T; ++t) levels[t] = discrete_path(unnorm_base, unnorm_target, q, schedule[t]);

  for (std::size_t t = 1; t <= T; ++t) {
    const Eigen::MatrixXd& k = kernels[t - 1];
    std::ostringstream os;
    os << "kernel for t = " << t;
    if (k.rows() != n || k.cols() != n) throw PreconditionError(os.str() + " has the wrong shape");
    if ((k.array() < 0.0).any() || ((k.rowwise().sum().array() - 1.0).abs() > 1e-12).any()) {
      throw PreconditionError(os.str() + " is not row-stochastic");
    }
    const Eigen::VectorXd pi = levels[t] / levels[t].sum();
    const Eigen::VectorXd moved = k.transpose() * pi;
    if ((moved - pi).cwiseAbs().maxCoeff() > 1e-12) {
      throw PreconditionError(os.str() + " does not leave the intermediate distribution invariant");
    }
  }

  // ratio[t][i] = pi~_t(i) / pi~_{t-1}(i)
  std::vector<Eigen::VectorXd> ratio(T + 1);
  for (std::size_t t = 1; t <= T; ++t) ratio[t] = levels[t].cwiseQuotient(levels[t - 1]);
  const Eigen::VectorXd pi0 = levels[0] / levels[0].sum();

  // Every sequence z_0..z_{T-1}; z_T does not enter the weight and its kernel row sums to 1.
  double expected = 0.0;
  std::vector<Eigen::Index> states(T, 0);
  for (;;) {
    double prob = pi0[states[0]];
    double weight = ratio[1][states[0]];
    for (std::size_t t = 1; t < T; ++t) {
      prob *= kernels[t - 1](states[t - 1], states[t]);
      weight *= ratio[t + 1][states[t]];
    }
    expected += prob * weight;
    std::size_t pos = T;
    while (pos > 0) {
      --pos;
      if (++states[pos] < n) break;
      states[pos] = 0;
      if (pos == 0) {
        pos = T + 1;
        break;
      }
    }
    if (pos == T + 1) break;
  }
  return {expected, unnorm_target.sum() / unnorm_base.sum()};
}

}  // namespace qpaths
