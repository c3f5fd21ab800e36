#include "qpaths/log_weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qpaths/errors.hpp"

namespace qpaths {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double max_or_throw(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) {
    if (std::isnan(x)) {
      throw DomainError("log-weights must not be NaN");
    }
    m = std::max(m, x);
  }
  return m;
}

}  // namespace

double log_sum_exp(std::span<const double> xs) {
  const double m = max_or_throw(xs);
  if (m == kNegInf || std::isinf(m)) {
    return m;
  }
  double acc = 0.0;
  for (double x : xs) {
    acc += std::exp(x - m);
  }
  return m + std::log(acc);
}

double log_mean_exp(std::span<const double> xs) {
  if (xs.empty()) {
    throw PreconditionError("log_mean_exp: empty input");
  }
  const double m = max_or_throw(xs);
  if (m == kNegInf || std::isinf(m)) {
    return m;
  }
  double acc = 0.0;
  for (double x : xs) {
    acc += std::exp(x - m);
  }
  return m + std::log(acc / static_cast<double>(xs.size()));
}

double effective_sample_size(std::span<const double> log_weights) {
  if (log_weights.empty()) {
    throw PreconditionError("effective_sample_size: empty input");
  }
  const double m = max_or_throw(log_weights);
  if (m == kNegInf) {
    throw DomainError("effective_sample_size: all weights are zero");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double l : log_weights) {
    const double w = std::exp(l - m);
    sum += w;
    sum_sq += w * w;
  }
  return sum * sum / sum_sq;
}

}  // namespace qpaths
