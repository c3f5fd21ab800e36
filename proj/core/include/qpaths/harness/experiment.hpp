#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qpaths/harness/config.hpp"

namespace qpaths::harness {

/// One (q, T, seed) cell of an experiment.
///
/// ais: log_lower is the log-mean-exp estimate and log_upper is NaN.
/// bdmc: log_lower / log_upper are the sandwich bounds and z_estimate is the forward estimate.
/// partition-mc: T = 0, log_lower is log Z_beta and log_upper its standard error.
struct ResultRow {
  Mode mode = Mode::kAis;
  double q = 1.0;
  std::size_t T = 0;
  std::uint64_t seed = 0;
  double log_lower = 0.0;
  double log_upper = 0.0;
  double z_estimate = 0.0;
  double ess = 0.0;
  std::size_t n_invalid = 0;
  double wall_ms = 0.0;
};

/// Field-wise equality; NaN equals NaN.
bool same_row(const ResultRow& a, const ResultRow& b);

struct RunOptions {
  unsigned threads = 1;
  /// Put measured times into wall_ms; otherwise it is 0 and output is byte-deterministic.
  bool record_wall_time = false;
  /// Called after each row with a one-line description and the elapsed milliseconds.
  std::function<void(const ResultRow&, double elapsed_ms)> on_row;
};

/// Runs every (q, T, seed) cell of an ais, bdmc or partition-mc config.
/// Seed s is base_seed + s; the stream id hashes (q index, T index), chains take substreams.
/// Rows are sorted by (q index, T, seed).
std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct DensityGridRow {
  double q;
  double beta;
  double z;
  double log_density;
};

/// Unnormalized log-densities of the path on a (q, beta, z) grid; 1-d endpoints only.
std::vector<DensityGridRow> run_density_grid(const ExperimentConfig& config);

struct SummaryRow {
  Mode mode;
  double q;
  std::size_t T;
  std::size_t n_seeds;
  double mean_z;
  std::optional<double> std_z;  ///< sample std (n - 1), absent for a single seed
  std::optional<double> abs_error;
  double mean_log_lower;
  double mean_log_upper;
};

/// Mean and seed-std of z_estimate keyed by (q, T), in first-appearance order.
/// Throws PreconditionError for mixed modes.
std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows,
                                  std::optional<double> z_true = std::nullopt);

}  // namespace qpaths::harness
