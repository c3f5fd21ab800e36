#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qpaths/densities.hpp"
#include "qpaths/errors.hpp"
#include "qpaths/hmc.hpp"
#include "qpaths/qpath.hpp"

namespace qpaths::harness {

/// Configuration problems raise qpaths::ConfigError; `field()` is the dotted key path.
enum class Mode { kAis, kBdmc, kDensityGrid, kPartitionMc };

std::string_view to_string(Mode mode);
/// Throws ConfigError("mode", ...) for unknown names.
Mode parse_mode(std::string_view name);

struct ScheduleConfig {
  /// Linear schedules, one per T. Empty when `betas` is given.
  std::vector<std::size_t> T_values;
  /// Explicit beta list.
  std::vector<double> betas;

  [[nodiscard]] std::vector<Schedule> schedules() const;
};

struct DensityGridConfig {
  std::size_t n_betas = 10;  ///< equally spaced on [0, 1]
  double z_min = -12.0;
  double z_max = 12.0;
  std::size_t n_points = 481;
};

struct PartitionConfig {
  double beta = 0.5;
  std::size_t n_samples = 100000;
};

struct ExperimentConfig {
  std::string name;
  Mode mode = Mode::kAis;
  DensitySpec base;
  DensitySpec target;
  std::vector<double> q_values;
  ScheduleConfig schedule;
  std::size_t n_chains = 1000;
  std::size_t n_seeds = 1;
  std::uint64_t base_seed = 0;
  HmcConfig hmc;
  std::optional<double> z_true;
  DensityGridConfig density_grid;
  PartitionConfig partition;
};

/// Parses and fully validates a YAML document. Unknown keys are rejected.
ExperimentConfig parse_config(std::string_view yaml_text);

ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace qpaths::harness
