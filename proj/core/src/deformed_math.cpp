#include "qpaths/deformed_math.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qpaths/errors.hpp"

namespace qpaths {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightSumTolerance = 1e-12;
constexpr double kVanishingDenominator = 1e-12;

void check_weights(std::span<const double> weights, std::size_t n_values) {
  if (weights.empty() || weights.size() != n_values) {
    throw PreconditionError("power mean: weights and values must have equal, non-zero length");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw PreconditionError("power mean: weights must be finite and non-negative");
    }
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw PreconditionError("power mean: weights sum to " + std::to_string(total) +
                            ", expected 1");
  }
}

double relative_error(double lhs, double rhs) {
  if (lhs == rhs) {
    return 0.0;
  }
  const double scale = std::max(std::abs(lhs), std::abs(rhs));
  if (!std::isfinite(scale)) {
    return kInf;
  }
  return std::abs(lhs - rhs) / scale;
}

}  // namespace

QOrder::QOrder(double q) : q_(q) {
  if (!std::isfinite(q)) {
    throw DomainError("q must be finite");
  }
}

bool QOrder::is_log_branch() const noexcept { return std::abs(1.0 - q_) < kQBranchEpsilon; }

QOrder QOrder::from_alpha(double alpha) { return QOrder((1.0 + alpha) / 2.0); }

double ln_q(double u, QOrder q) {
  if (std::isnan(u)) {
    throw DomainError("ln_q: NaN argument");
  }
  if (u <= 0.0) {
    throw DomainError("ln_q: argument must be positive, got " + std::to_string(u));
  }
  const double log_u = std::log(u);
  if (q.is_log_branch()) {
    return log_u;
  }
  const double s = q.one_minus();
  return std::expm1(s * log_u) / s;
}

double log_exp_q(double u, QOrder q) {
  if (std::isnan(u)) {
    throw DomainError("exp_q: NaN argument");
  }
  if (q.is_log_branch()) {
    return u;
  }
  const double s = q.one_minus();
  const double su = s * u;
  if (su <= -1.0) {
    return s > 0.0 ? -kInf : kInf;
  }
  return std::log1p(su) / s;
}

double exp_q(double u, QOrder q) {
  if (q.is_log_branch()) {
    if (std::isnan(u)) {
      throw DomainError("exp_q: NaN argument");
    }
    return std::exp(u);
  }
  return std::exp(log_exp_q(u, q));
}

double log_power_mean(std::span<const double> weights, std::span<const double> log_values,
                      QOrder q) {
  check_weights(weights, log_values.size());
  for (double l : log_values) {
    if (std::isnan(l) || l == kInf) {
      throw DomainError("log_power_mean: log values must be finite or -inf");
    }
  }

  // A mean of identical values is that value; no arithmetic is done on it.
  {
    bool first = true;
    bool all_equal = true;
    double common = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] == 0.0) {
        continue;
      }
      if (first) {
        common = log_values[i];
        first = false;
      } else if (log_values[i] != common) {
        all_equal = false;
        break;
      }
    }
    if (all_equal) {
      return common;
    }
  }

  const double s = q.one_minus();
  const bool log_branch = q.is_log_branch();

  if (log_branch || s < 0.0) {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0 && log_values[i] == -kInf) {
        return -kInf;
      }
    }
  }

  if (log_branch) {
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] > 0.0) {
        acc += weights[i] * log_values[i];
      }
    }
    return acc;
  }

  double shift = -kInf;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0 && log_values[i] != -kInf) {
      shift = std::max(shift, std::log(weights[i]) + s * log_values[i]);
    }
  }
  if (shift == -kInf) {
    return -kInf;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] > 0.0 && log_values[i] != -kInf) {
      acc += std::exp(std::log(weights[i]) + s * log_values[i] - shift);
    }
  }
  return (shift + std::log(acc)) / s;
}

double power_mean(std::span<const double> weights, std::span<const double> values, QOrder q) {
  std::vector<double> logs;
  logs.reserve(values.size());
  for (double v : values) {
    if (std::isnan(v) || v <= 0.0) {
      throw DomainError("power_mean: values must be positive");
    }
    logs.push_back(std::log(v));
  }
  return std::exp(log_power_mean(weights, logs, q));
}

QIdentityResiduals q_identity_residuals(std::span<const double> xs, QOrder q) {
  if (xs.empty()) {
    throw PreconditionError("q identities: need at least one x");
  }
  for (double x : xs) {
    if (!std::isfinite(x)) {
      throw DomainError("q identities: inputs must be finite");
    }
  }
  const double s = q.is_log_branch() ? 0.0 : q.one_minus();

  // exp_q(sum x) vs prod exp_q(x_n / (1 + s * partial_sum))
  double total = 0.0;
  double sum_rhs = 1.0;
  for (double x : xs) {
    const double denom = 1.0 + s * total;
    if (std::abs(denom) < kVanishingDenominator) {
      throw DegenerateInputError("sum identity: denominator 1 + (1-q) * partial sum vanishes");
    }
    sum_rhs *= exp_q(x / denom, q);
    total += x;
  }
  const double sum_lhs = exp_q(total, q);

  // prod exp_q(x) vs exp_q(sum x_n * prod_{i<n} (1 + s x_i))
  double prod_lhs = 1.0;
  double scaled_sum = 0.0;
  double running = 1.0;
  for (double x : xs) {
    prod_lhs *= exp_q(x, q);
    scaled_sum += x * running;
    running *= 1.0 + s * x;
  }
  const double prod_rhs = exp_q(scaled_sum, q);

  return {relative_error(sum_lhs, sum_rhs), relative_error(prod_lhs, prod_rhs)};
}

bool verify_q_identities(std::span<const double> xs, QOrder q, double tol) {
  const auto r = q_identity_residuals(xs, q);
  return r.sum_identity <= tol && r.product_identity <= tol;
}

}  // namespace qpaths
