#pragma once

#include <span>

namespace qpaths {

/// log(sum exp(x_i)) with max shift. -inf for an all -inf input.
double log_sum_exp(std::span<const double> xs);

/// log((1/n) sum exp(x_i)). Exact on constant input. Throws PreconditionError when empty.
double log_mean_exp(std::span<const double> xs);

/// (sum w)^2 / sum w^2 from log-weights, in (0, n].
/// Throws PreconditionError when empty and DomainError when every weight is zero.
double effective_sample_size(std::span<const double> log_weights);

}  // namespace qpaths
