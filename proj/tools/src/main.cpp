#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "builtin_configs.hpp"
#include "qpaths/errors.hpp"
#include "qpaths/harness/config.hpp"
#include "qpaths/harness/experiment.hpp"
#include "qpaths/harness/result_io.hpp"
#include "selftest.hpp"

namespace {

using namespace qpaths;
using namespace qpaths::harness;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  bool quiet = false;
  bool record_wall_time = false;
};

enum class Report { kNone, kTable1, kBdmcCurve };

void add_common(CLI::App* cmd, Options& o, bool runs_chains) {
  cmd->add_option("--config", o.config, "Experiment config (YAML)");
  cmd->add_option("--out", o.out, "Output CSV path (default: stdout)");
  cmd->add_option("--seed", o.seed, "Override base_seed");
  cmd->add_option("--threads", o.threads, "Worker threads, 0 = auto")->capture_default_str();
  cmd->add_flag("--quiet", o.quiet, "Suppress progress and summaries");
  if (runs_chains) {
    cmd->add_flag("--record-wall-time", o.record_wall_time,
                  "Fill wall_ms in the CSV (output is then no longer byte-reproducible)");
  }
}

ExperimentConfig resolve_config(const Options& o, std::string_view builtin) {
  ExperimentConfig c = o.config.empty() ? parse_config(builtin) : load_config(o.config);
  if (o.seed) c.base_seed = *o.seed;
  return c;
}

// Writes to the file if one was given, otherwise to stdout. Everything is produced
// before this is called, so a failed run leaves no partial output behind.
void emit(const std::string& path, const std::function<void(std::ostream&)>& write) {
  if (path.empty()) {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  write(f);
  if (!f) throw std::runtime_error("error writing " + path);
}

std::string sibling(const std::string& out, const char* ext) {
  return fs::path(out).replace_extension(ext).string();
}

std::string fmt(double v, int precision = 4) {
  if (std::isnan(v)) return "-";
  std::ostringstream os;
  os << std::fixed << std::setprecision(precision) << v;
  return os.str();
}

void print_table1(std::ostream& os, const std::vector<SummaryRow>& s) {
  os << "  q      Z_est (mean +- std)     Z_err\n";
  for (const SummaryRow& r : s) {
    os << "  " << std::left << std::setw(6) << fmt(r.q, 2) << " " << fmt(r.mean_z) << " +- "
       << std::setw(10) << fmt(r.std_z.value_or(NAN)) << "  " << fmt(r.abs_error.value_or(NAN)) << '\n'
       << std::right;
  }
}

void print_bdmc(std::ostream& os, const std::vector<SummaryRow>& s) {
  os << "  q      T      lower      upper      gap\n";
  for (const SummaryRow& r : s) {
    os << "  " << std::left << std::setw(6) << fmt(r.q, 2) << " " << std::setw(6) << r.T << std::right
       << std::setw(9) << fmt(r.mean_log_lower) << "  " << std::setw(9) << fmt(r.mean_log_upper) << "  "
       << fmt(r.mean_log_upper - r.mean_log_lower) << '\n';
  }
}

int run_config(const ExperimentConfig& c, const Options& o, Report report) {
  if (c.mode == Mode::kDensityGrid) {
    const auto rows = run_density_grid(c);
    emit(o.out, [&](std::ostream& os) { write_density_grid_csv(os, rows); });
    if (!o.quiet) std::cerr << rows.size() << " grid rows\n";
    return kExitOk;
  }

  std::ostringstream timing;
  RunOptions ro;
  ro.threads = o.threads;
  ro.record_wall_time = o.record_wall_time;
  ro.on_row = [&](const ResultRow& r, double ms) {
    timing << to_string(r.mode) << " q=" << r.q << " T=" << r.T << " seed=" << r.seed << " "
           << fmt(ms, 1) << " ms\n";
    if (!o.quiet) std::cerr << "  " << to_string(r.mode) << " q=" << r.q << " T=" << r.T << " seed=" << r.seed
                            << "  " << fmt(ms, 1) << " ms\n";
  };
  const std::vector<ResultRow> rows = run_experiment(c, ro);

  emit(o.out, [&](std::ostream& os) { write_csv(os, rows); });
  if (!o.out.empty()) {
    emit(sibling(o.out, ".jsonl"), [&](std::ostream& os) { write_jsonl(os, rows); });
    emit(sibling(o.out, ".timing.log"), [&](std::ostream& os) { os << timing.str(); });
  }
  if (!o.quiet && report != Report::kNone) {
    // the summary goes wherever the CSV does not
    std::ostream& os = o.out.empty() ? std::cerr : std::cout;
    const auto s = aggregate(rows, c.z_true);
    if (report == Report::kTable1) print_table1(os, s);
    if (report == Report::kBdmcCurve) print_bdmc(os, s);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AIS over q-paths: partition-function ratio experiments"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "Run an experiment config");
  std::string positional;
  run->add_option("config_file", positional, "Experiment config (YAML)");
  add_common(run, o, true);

  auto* table1 = app.add_subcommand("table1", "AIS partition estimates for several q at T=100 (built-in config)");
  add_common(table1, o, true);
  auto* bdmc = app.add_subcommand("bdmc-curve", "BDMC bounds over T in {2,5,10,25,50,100,200} (built-in config)");
  add_common(bdmc, o, true);
  auto* grid = app.add_subcommand("density-grid", "Log-densities of intermediate distributions on a grid");
  add_common(grid, o, false);
  auto* self = app.add_subcommand("selftest", "Fast property checks that need no input files");
  self->add_flag("--quiet", o.quiet, "Only report failures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*self) return qpaths::tool::run_selftest(std::cout, o.quiet) ? kExitOk : kExitFailure;
    if (*run) {
      if (!positional.empty() && !o.config.empty()) {
        throw ConfigError("--config", "give the config either positionally or with --config");
      }
      if (o.config.empty()) o.config = positional;
      if (o.config.empty()) throw ConfigError("--config", "run needs a config file");
      return run_config(resolve_config(o, {}), o, Report::kNone);
    }
    if (*table1) return run_config(resolve_config(o, qpaths::tool::kTable1Config), o, Report::kTable1);
    if (*bdmc) return run_config(resolve_config(o, qpaths::tool::kBdmcCurveConfig), o, Report::kBdmcCurve);
    if (*grid) {
      const ExperimentConfig c = resolve_config(o, qpaths::tool::kDensityGridConfig);
      if (c.mode != Mode::kDensityGrid) throw ConfigError("mode", "density-grid needs a density-grid config");
      return run_config(c, o, Report::kNone);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}
