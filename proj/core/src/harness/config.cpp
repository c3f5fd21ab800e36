#include "qpaths/harness/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "qpaths/errors.hpp"

namespace qpaths::harness {

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const YAML::Node& map, const std::string& where,
                    std::initializer_list<const char*> allowed) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(join(where, key), "unknown key");
  }
}

YAML::Node require_map(const YAML::Node& node, const std::string& field) {
  if (!node || !node.IsMap()) throw ConfigError(field, "expected a mapping");
  return node;
}

double as_real(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ConfigError(field, "expected a number");
  double v;
  try {
    v = node.as<double>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "expected a number, got '" + node.Scalar() + "'");
  }
  if (!std::isfinite(v)) throw ConfigError(field, "must be finite");
  return v;
}

long long as_integer(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) throw ConfigError(field, "expected an integer");
  try {
    return node.as<long long>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "expected an integer, got '" + node.Scalar() + "'");
  }
}

std::size_t as_positive(const YAML::Node& node, const std::string& field) {
  const long long v = as_integer(node, field);
  if (v < 1) throw ConfigError(field, "must be a positive integer, got " + std::to_string(v));
  return static_cast<std::size_t>(v);
}

std::vector<double> as_real_list(const YAML::Node& node, const std::string& field) {
  if (node.IsScalar()) return {as_real(node, field)};
  if (!node.IsSequence() || node.size() == 0) throw ConfigError(field, "expected a non-empty list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(as_real(node[i], field + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// scalar -> isotropic, list -> diagonal, list of lists -> dense
MatrixSpec parse_matrix(const YAML::Node& node, const std::string& field, Eigen::Index dim,
                        bool square_entries) {
  auto entry = [&](double v) { return square_entries ? v * v : v; };
  if (node.IsScalar()) {
    return Eigen::VectorXd(Eigen::VectorXd::Constant(dim, entry(as_real(node, field))));
  }
  if (!node.IsSequence() || static_cast<Eigen::Index>(node.size()) != dim) {
    throw ConfigError(field, "expected a number, a list of " + std::to_string(dim) +
                                 " numbers or a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  }
  if (node[0].IsSequence()) {
    if (square_entries) throw ConfigError(field, "standard deviations must be given per axis");
    Eigen::MatrixXd m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto row = as_real_list(node[static_cast<std::size_t>(i)], field + "[" + std::to_string(i) + "]");
      if (static_cast<Eigen::Index>(row.size()) != dim) throw ConfigError(field, "matrix must be square");
      for (Eigen::Index j = 0; j < dim; ++j) m(i, j) = row[static_cast<std::size_t>(j)];
    }
    return m;
  }
  Eigen::VectorXd diag = to_vector(as_real_list(node, field));
  for (Eigen::Index i = 0; i < dim; ++i) diag[i] = entry(diag[i]);
  return diag;
}

DensitySpec parse_density(const YAML::Node& node, const std::string& field) {
  require_map(node, field);
  if (!node["kind"]) throw ConfigError(join(field, "kind"), "missing density kind");
  const auto kind = node["kind"].as<std::string>();
  if (!node["mean"]) throw ConfigError(join(field, "mean"), "missing");
  const Eigen::VectorXd mean = to_vector(as_real_list(node["mean"], join(field, "mean")));
  const auto dim = mean.size();

  DensitySpec spec;
  if (kind == "gaussian") {
    reject_unknown(node, field, {"kind", "mean", "variance", "std"});
    if (node["variance"] && node["std"]) throw ConfigError(join(field, "std"), "give either variance or std, not both");
    if (node["variance"]) {
      spec = GaussianSpec{mean, parse_matrix(node["variance"], join(field, "variance"), dim, false)};
    } else if (node["std"]) {
      spec = GaussianSpec{mean, parse_matrix(node["std"], join(field, "std"), dim, true)};
    } else {
      throw ConfigError(join(field, "variance"), "missing (or give std)");
    }
  } else if (kind == "student_t") {
    reject_unknown(node, field, {"kind", "mean", "scale", "nu", "q"});
    if (!node["scale"]) throw ConfigError(join(field, "scale"), "missing");
    const MatrixSpec scale = parse_matrix(node["scale"], join(field, "scale"), dim, false);
    double nu;
    if (node["nu"] && node["q"]) throw ConfigError(join(field, "q"), "give either nu or q, not both");
    if (node["nu"]) {
      nu = as_real(node["nu"], join(field, "nu"));
      if (!(nu > 0.0)) throw ConfigError(join(field, "nu"), "degrees of freedom must be positive");
    } else if (node["q"]) {
      const double q = as_real(node["q"], join(field, "q"));
      try {
        nu = nu_from_q(q, static_cast<int>(dim));
      } catch (const DomainError& e) {
        throw ConfigError(join(field, "q"), e.what());
      }
    } else {
      throw ConfigError(join(field, "nu"), "missing (or give q)");
    }
    spec = StudentTSpec{mean, scale, nu};
  } else {
    throw ConfigError(join(field, "kind"), "unknown density kind '" + kind + "' (expected gaussian or student_t)");
  }
  try {
    (void)make_density(spec);
  } catch (const ConstructionError& e) {
    throw ConfigError(field, e.what());
  }
  return spec;
}

ScheduleConfig parse_schedule(const YAML::Node& node) {
  const std::string field = "schedule";
  require_map(node, field);
  const auto type = node["type"] ? node["type"].as<std::string>() : std::string("linear");
  ScheduleConfig out;
  if (type == "linear") {
    reject_unknown(node, field, {"type", "T"});
    if (!node["T"]) throw ConfigError("schedule.T", "missing");
    const YAML::Node t = node["T"];
    if (t.IsSequence()) {
      if (t.size() == 0) throw ConfigError("schedule.T", "empty list");
      for (std::size_t i = 0; i < t.size(); ++i) out.T_values.push_back(as_positive(t[i], "schedule.T"));
    } else {
      out.T_values.push_back(as_positive(t, "schedule.T"));
    }
  } else if (type == "explicit") {
    reject_unknown(node, field, {"type", "betas"});
    if (!node["betas"]) throw ConfigError("schedule.betas", "missing");
    out.betas = as_real_list(node["betas"], "schedule.betas");
    try {
      (void)Schedule(out.betas);
    } catch (const PreconditionError& e) {
      throw ConfigError("schedule.betas", e.what());
    }
  } else {
    throw ConfigError("schedule.type", "unknown schedule type '" + type + "' (expected linear or explicit)");
  }
  return out;
}

HmcConfig parse_hmc(const YAML::Node& node) {
  HmcConfig cfg;
  if (!node) return cfg;
  require_map(node, "hmc");
  reject_unknown(node, "hmc", {"step_size", "step_jitter", "n_leapfrog", "transitions_per_temperature", "mass"});
  if (node["step_size"]) {
    cfg.step_size = as_real(node["step_size"], "hmc.step_size");
    if (!(cfg.step_size > 0.0)) throw ConfigError("hmc.step_size", "must be positive");
  }
  if (node["n_leapfrog"]) cfg.n_leapfrog = static_cast<int>(as_positive(node["n_leapfrog"], "hmc.n_leapfrog"));
  if (node["transitions_per_temperature"]) {
    cfg.transitions_per_temperature = static_cast<int>(
        as_positive(node["transitions_per_temperature"], "hmc.transitions_per_temperature"));
  }
  if (node["step_jitter"]) {
    cfg.step_jitter = as_real(node["step_jitter"], "hmc.step_jitter");
    if (!(cfg.step_jitter >= 0.0 && cfg.step_jitter < 1.0)) throw ConfigError("hmc.step_jitter", "must lie in [0, 1)");
  }
  if (node["mass"]) {
    cfg.mass = as_real(node["mass"], "hmc.mass");
    if (!(cfg.mass > 0.0)) throw ConfigError("hmc.mass", "must be positive");
  }
  return cfg;
}

}  // namespace

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kAis: return "ais";
    case Mode::kBdmc: return "bdmc";
    case Mode::kDensityGrid: return "density-grid";
    case Mode::kPartitionMc: return "partition-mc";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  for (Mode m : {Mode::kAis, Mode::kBdmc, Mode::kDensityGrid, Mode::kPartitionMc}) {
    if (name == to_string(m)) return m;
  }
  throw ConfigError("mode", "unknown mode '" + std::string(name) +
                                "' (expected ais, bdmc, density-grid or partition-mc)");
}

std::vector<Schedule> ScheduleConfig::schedules() const {
  std::vector<Schedule> out;
  if (!betas.empty()) {
    out.emplace_back(betas);
    return out;
  }
  for (std::size_t T : T_values) out.push_back(linear_schedule(T));
  return out;
}

namespace {

ExperimentConfig parse_root(const YAML::Node& root) {
  require_map(root, "<document>");
  reject_unknown(root, "", {"name", "mode", "endpoints", "q_values", "schedule", "n_chains", "n_seeds",
                            "base_seed", "hmc", "z_true", "density_grid", "partition"});

  ExperimentConfig cfg;
  if (root["name"]) cfg.name = root["name"].as<std::string>();
  if (!root["mode"]) throw ConfigError("mode", "missing");
  cfg.mode = parse_mode(root["mode"].as<std::string>());

  const YAML::Node endpoints = require_map(root["endpoints"], "endpoints");
  reject_unknown(endpoints, "endpoints", {"base", "target"});
  cfg.base = parse_density(endpoints["base"], "endpoints.base");
  cfg.target = parse_density(endpoints["target"], "endpoints.target");
  if (spec_dim(cfg.base) != spec_dim(cfg.target)) {
    throw ConfigError("endpoints.target", "dimension differs from endpoints.base");
  }

  if (!root["q_values"]) throw ConfigError("q_values", "missing");
  cfg.q_values = as_real_list(root["q_values"], "q_values");

  if (root["n_chains"]) cfg.n_chains = as_positive(root["n_chains"], "n_chains");
  if (root["n_seeds"]) cfg.n_seeds = as_positive(root["n_seeds"], "n_seeds");
  if (root["base_seed"]) {
    const long long s = as_integer(root["base_seed"], "base_seed");
    if (s < 0) throw ConfigError("base_seed", "must be non-negative");
    cfg.base_seed = static_cast<std::uint64_t>(s);
  }
  cfg.hmc = parse_hmc(root["hmc"]);
  if (root["z_true"]) {
    cfg.z_true = as_real(root["z_true"], "z_true");
    if (!(*cfg.z_true > 0.0)) throw ConfigError("z_true", "must be positive");
  }

  const bool annealing = cfg.mode == Mode::kAis || cfg.mode == Mode::kBdmc;
  if (annealing) {
    if (!root["schedule"]) throw ConfigError("schedule", "missing");
    cfg.schedule = parse_schedule(root["schedule"]);
  } else if (root["schedule"]) {
    cfg.schedule = parse_schedule(root["schedule"]);
  }

  if (const YAML::Node g = root["density_grid"]) {
    require_map(g, "density_grid");
    reject_unknown(g, "density_grid", {"n_betas", "z_min", "z_max", "n_points"});
    if (g["n_betas"]) cfg.density_grid.n_betas = as_positive(g["n_betas"], "density_grid.n_betas");
    if (g["z_min"]) cfg.density_grid.z_min = as_real(g["z_min"], "density_grid.z_min");
    if (g["z_max"]) cfg.density_grid.z_max = as_real(g["z_max"], "density_grid.z_max");
    if (g["n_points"]) cfg.density_grid.n_points = as_positive(g["n_points"], "density_grid.n_points");
  }
  if (cfg.mode == Mode::kDensityGrid) {
    if (spec_dim(cfg.base) != 1) throw ConfigError("endpoints", "density-grid mode needs 1-d endpoints");
    if (!(cfg.density_grid.z_max > cfg.density_grid.z_min)) {
      throw ConfigError("density_grid.z_max", "must exceed density_grid.z_min");
    }
    if (cfg.density_grid.n_betas < 2) throw ConfigError("density_grid.n_betas", "need at least 2 betas");
    if (cfg.density_grid.n_points < 2) throw ConfigError("density_grid.n_points", "need at least 2 points");
  }

  if (const YAML::Node p = root["partition"]) {
    require_map(p, "partition");
    reject_unknown(p, "partition", {"beta", "n_samples"});
    if (p["beta"]) cfg.partition.beta = as_real(p["beta"], "partition.beta");
    if (p["n_samples"]) cfg.partition.n_samples = as_positive(p["n_samples"], "partition.n_samples");
  }
  if (cfg.mode == Mode::kPartitionMc && !(cfg.partition.beta >= 0.0 && cfg.partition.beta <= 1.0)) {
    throw ConfigError("partition.beta", "must lie in [0, 1]");
  }
  return cfg;
}

}  // namespace

ExperimentConfig parse_config(std::string_view yaml_text) {
  try {
    return parse_root(YAML::Load(std::string(yaml_text)));
  } catch (const YAML::Exception& e) {
    // parse errors and scalar conversions the field checks above do not cover
    throw ConfigError("<document>", std::string("YAML error: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace qpaths::harness
