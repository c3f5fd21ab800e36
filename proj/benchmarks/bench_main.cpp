#include <benchmark/benchmark.h>

#include <array>

#include "qpaths/ais.hpp"
#include "qpaths/deformed_math.hpp"
#include "qpaths/hmc.hpp"
#include "qpaths/qpath.hpp"

namespace {

using namespace qpaths;

QPath gaussian_path(double q) {
  return QPath(make_gaussian(GaussianSpec::univariate(-4.0, 3.0)),
               make_gaussian(GaussianSpec::univariate(4.0, 1.0)), QOrder(q));
}

void BM_LogPowerMean(benchmark::State& state) {
  const QOrder q(0.5);
  const std::array<double, 2> w{0.3, 0.7};
  std::array<double, 2> l{-1.5, -20.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(log_power_mean(w, l, q));
    l[0] += 1e-12;
  }
}
BENCHMARK(BM_LogPowerMean);

void BM_PathValueAndGradient(benchmark::State& state) {
  const QPath p = gaussian_path(state.range(0) / 100.0);
  Point z(1);
  z[0] = 0.7;
  Point g(1);
  GradientScratch scratch;
  for (auto _ : state) {
    benchmark::DoNotOptimize(p.value_and_gradient(0.4, z, g, scratch));
  }
}
BENCHMARK(BM_PathValueAndGradient)->Arg(0)->Arg(90)->Arg(100);

void BM_HmcTransition(benchmark::State& state) {
  const QPath p = gaussian_path(0.9);
  const HmcConfig cfg;
  RngStream rng(1, 0);
  HmcWorkspace ws;
  Point z(1);
  z[0] = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hmc_transition(p, 0.5, z, cfg, rng, ws));
  }
}
BENCHMARK(BM_HmcTransition);

void BM_AisRun(benchmark::State& state) {
  const QPath p = gaussian_path(0.9);
  const Schedule s = linear_schedule(static_cast<std::size_t>(state.range(0)));
  AisOptions opt;
  opt.threads = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_ais(p, s, HmcConfig{}, 100, RngStream(1, 0), opt));
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_AisRun)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
