#include "qpaths/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include "qpaths/ais.hpp"
#include "qpaths/errors.hpp"

namespace qpaths::harness {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_double(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

bool same_row(const ResultRow& a, const ResultRow& b) {
  return a.mode == b.mode && same_double(a.q, b.q) && a.T == b.T && a.seed == b.seed &&
         same_double(a.log_lower, b.log_lower) && same_double(a.log_upper, b.log_upper) &&
         same_double(a.z_estimate, b.z_estimate) && same_double(a.ess, b.ess) &&
         a.n_invalid == b.n_invalid && same_double(a.wall_ms, b.wall_ms);
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (config.mode == Mode::kDensityGrid) {
    throw PreconditionError("density-grid configs go through run_density_grid");
  }
  const DensityHandle base = make_density(config.base);
  const DensityHandle target = make_density(config.target);
  const std::vector<Schedule> schedules =
      config.mode == Mode::kPartitionMc ? std::vector<Schedule>{} : config.schedule.schedules();
  const std::size_t n_schedules = config.mode == Mode::kPartitionMc ? 1 : schedules.size();
  const AisOptions ais_options{options.threads, false};

  std::vector<ResultRow> rows;
  for (std::size_t qi = 0; qi < config.q_values.size(); ++qi) {
    const QPath path(base, target, QOrder(config.q_values[qi]));
    for (std::size_t ti = 0; ti < n_schedules; ++ti) {
      for (std::size_t s = 0; s < config.n_seeds; ++s) {
        const auto start = std::chrono::steady_clock::now();
        const std::uint64_t seed = config.base_seed + s;
        const RngStream rng(seed, derive_stream_id({qi, ti}));
        ResultRow row;
        row.mode = config.mode;
        row.q = config.q_values[qi];
        row.seed = seed;
        switch (config.mode) {
          case Mode::kAis: {
            const AisResult r = run_ais(path, schedules[ti], config.hmc, config.n_chains, rng, ais_options);
            row.T = schedules[ti].steps();
            row.log_lower = r.log_ratio_estimate;
            row.log_upper = kNaN;
            row.z_estimate = std::exp(r.log_ratio_estimate);
            row.ess = r.ess;
            row.n_invalid = r.n_invalid;
            break;
          }
          case Mode::kBdmc: {
            const BdmcResult r = run_bdmc(path, schedules[ti], config.hmc, config.n_chains, rng, ais_options);
            row.T = schedules[ti].steps();
            row.log_lower = r.lower;
            row.log_upper = r.upper;
            row.z_estimate = std::exp(r.forward.log_ratio_estimate);
            row.ess = r.forward.ess;
            row.n_invalid = r.forward.n_invalid + r.reverse.n_invalid;
            break;
          }
          case Mode::kPartitionMc: {
            RngStream local = rng;
            const PartitionEstimate e =
                estimate_partition(path, config.partition.beta, config.partition.n_samples, local);
            row.T = 0;
            row.log_lower = e.log_z;
            row.log_upper = e.std_error;
            row.z_estimate = std::exp(e.log_z);
            row.ess = e.ess;
            break;
          }
          case Mode::kDensityGrid:
            break;
        }
        const double elapsed =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        if (options.record_wall_time) row.wall_ms = elapsed;
        if (options.on_row) options.on_row(row, elapsed);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<DensityGridRow> run_density_grid(const ExperimentConfig& config) {
  const DensityHandle base = make_density(config.base);
  const DensityHandle target = make_density(config.target);
  if (base.dim() != 1) throw PreconditionError("density grid needs 1-d endpoints");
  const DensityGridConfig& g = config.density_grid;
  std::vector<DensityGridRow> rows;
  rows.reserve(config.q_values.size() * g.n_betas * g.n_points);
  Point z(1);
  for (double qv : config.q_values) {
    const QPath path(base, target, QOrder(qv));
    for (std::size_t b = 0; b < g.n_betas; ++b) {
      const double beta = b + 1 == g.n_betas ? 1.0 : static_cast<double>(b) / static_cast<double>(g.n_betas - 1);
      for (std::size_t k = 0; k < g.n_points; ++k) {
        z[0] = k + 1 == g.n_points
                   ? g.z_max
                   : g.z_min + (g.z_max - g.z_min) * static_cast<double>(k) / static_cast<double>(g.n_points - 1);
        rows.push_back({qv, beta, z[0], path.log_density_at(beta, z)});
      }
    }
  }
  return rows;
}

std::vector<SummaryRow> aggregate(const std::vector<ResultRow>& rows, std::optional<double> z_true) {
  std::vector<SummaryRow> out;
  if (rows.empty()) return out;
  const Mode mode = rows.front().mode;
  std::vector<std::vector<const ResultRow*>> groups;
  for (const ResultRow& r : rows) {
    if (r.mode != mode) throw PreconditionError("cannot aggregate rows from different modes");
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
      return g.front()->q == r.q && g.front()->T == r.T;
    });
    if (it == groups.end()) {
      groups.push_back({&r});
    } else {
      it->push_back(&r);
    }
  }
  for (const auto& g : groups) {
    const double n = static_cast<double>(g.size());
    double sum = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    for (const ResultRow* r : g) {
      sum += r->z_estimate;
      lower += r->log_lower;
      upper += r->log_upper;
    }
    SummaryRow s{mode, g.front()->q, g.front()->T, g.size(), sum / n, std::nullopt, std::nullopt,
                 lower / n, upper / n};
    if (g.size() >= 2) {
      double ss = 0.0;
      for (const ResultRow* r : g) ss += (r->z_estimate - s.mean_z) * (r->z_estimate - s.mean_z);
      s.std_z = std::sqrt(ss / (n - 1.0));
    }
    if (z_true) s.abs_error = std::abs(s.mean_z - *z_true);
    out.push_back(s);
  }
  return out;
}

}  // namespace qpaths::harness
