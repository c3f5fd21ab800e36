#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>

#include "qpaths/ais.hpp"
#include "qpaths/errors.hpp"
#include "qpaths/log_weights.hpp"

namespace qpaths {
namespace {

DensityHandle gauss(double m, double v) { return make_gaussian(GaussianSpec::univariate(m, v)); }

HmcConfig frozen() {
  HmcConfig c;
  c.transitions_per_temperature = 0;
  return c;
}

TEST(Ais, IdenticalEndpointsGiveExactZero) {
  for (double q : {0.0, 0.5, 1.0, 2.0}) {
    const QPath path(gauss(1.0, 2.0), gauss(1.0, 2.0), QOrder(q));
    const AisResult r = run_ais(path, linear_schedule(20), HmcConfig{}, 200, RngStream(3, 0));
    ASSERT_EQ(r.log_weights.size(), 200u);
    for (double w : r.log_weights) EXPECT_EQ(w, 0.0);
    EXPECT_EQ(r.log_ratio_estimate, 0.0);
    EXPECT_EQ(r.n_invalid, 0u);
  }
}

TEST(Ais, SingleStepIsImportanceSampling) {
  const QPath path(gauss(0.0, 1.0), gauss(0.5, 1.0), QOrder(1.0));
  const AisResult r = run_ais(path, linear_schedule(1), HmcConfig{}, 100000, RngStream(11, 0));
  EXPECT_EQ(r.acceptance_rate, 0.0);
  double mean = 0.0;
  double sq = 0.0;
  for (double lw : r.log_weights) {
    const double w = std::exp(lw);
    mean += w;
    sq += w * w;
  }
  const double n = static_cast<double>(r.log_weights.size());
  mean /= n;
  const double sd = std::sqrt(sq / n - mean * mean);
  const double se = sd / (std::sqrt(n) * mean);
  EXPECT_LE(std::abs(r.log_ratio_estimate), 3.0 * se);
}

TEST(Ais, DeterministicForSameStream) {
  const QPath path(gauss(-4.0, 3.0), gauss(4.0, 1.0), QOrder(0.5));
  const AisResult a = run_ais(path, linear_schedule(15), HmcConfig{}, 64, RngStream(5, 9));
  const AisResult b = run_ais(path, linear_schedule(15), HmcConfig{}, 64, RngStream(5, 9));
  const AisResult c = run_ais(path, linear_schedule(15), HmcConfig{}, 64, RngStream(6, 9));
  EXPECT_EQ(a.log_weights, b.log_weights);
  EXPECT_NE(a.log_weights, c.log_weights);
  EXPECT_EQ(a.seed, 5u);
  EXPECT_EQ(a.stream_id, 9u);
}

TEST(Ais, ThreadCountDoesNotChangeResult) {
  const QPath path(gauss(-4.0, 3.0), gauss(4.0, 1.0), QOrder(0.9));
  AisOptions one;
  AisOptions three;
  three.threads = 3;
  const AisResult a = run_ais(path, linear_schedule(10), HmcConfig{}, 97, RngStream(1, 2), one);
  const AisResult b = run_ais(path, linear_schedule(10), HmcConfig{}, 97, RngStream(1, 2), three);
  EXPECT_EQ(a.log_weights, b.log_weights);
  EXPECT_EQ(a.acceptance_rate, b.acceptance_rate);
}

TEST(Ais, RecordedIncrementsSumToWeights) {
  const QPath path(gauss(-4.0, 3.0), gauss(4.0, 1.0), QOrder(0.5));
  AisOptions opts;
  opts.record_increments = true;
  const AisResult r = run_ais(path, linear_schedule(12), HmcConfig{}, 40, RngStream(8, 0), opts);
  ASSERT_EQ(r.per_step_log_increments.rows(), 40);
  ASSERT_EQ(r.per_step_log_increments.cols(), 12);
  for (Eigen::Index c = 0; c < 40; ++c) {
    EXPECT_NEAR(r.per_step_log_increments.row(c).sum(), r.log_weights[static_cast<std::size_t>(c)], 1e-12);
  }
}

TEST(Ais, ScaledTargetShiftsWeightsGeometric) {
  const double log_c = std::log(7.5);
  const QPath path(gauss(-4.0, 3.0), gauss(4.0, 1.0), QOrder(1.0));
  const QPath scaled(gauss(-4.0, 3.0), gauss(4.0, 1.0).scaled(log_c), QOrder(1.0));
  const Schedule s = linear_schedule(25);
  const AisResult a = run_ais(path, s, HmcConfig{}, 200, RngStream(21, 0));
  const AisResult b = run_ais(scaled, s, HmcConfig{}, 200, RngStream(21, 0));
  ASSERT_EQ(a.log_weights.size(), b.log_weights.size());
  for (std::size_t i = 0; i < a.log_weights.size(); ++i) {
    EXPECT_NEAR(b.log_weights[i] - a.log_weights[i], log_c, 1e-10);
  }
  EXPECT_NEAR(b.log_ratio_estimate - a.log_ratio_estimate, log_c, 1e-10);
}

// For q != 1 scaling the target reparameterizes beta; the mapped schedule recovers the chains.
// A short step keeps the leapfrog far from its stability edge, where rounding differences grow.
TEST(Ais, ScaledTargetShiftsWeightsOnMappedSchedule) {
  const double log_c = std::log(7.5);
  HmcConfig cfg;
  cfg.step_size = 0.5;
  for (double q : {0.0, 0.5, 0.9, 1.5}) {
    const double k = std::exp((1.0 - q) * log_c);
    const Schedule s = linear_schedule(25);
    std::vector<double> mapped;
    for (std::size_t t = 0; t <= s.steps(); ++t) {
      const double b = s[t];
      mapped.push_back(b * k / (1.0 - b + b * k));
    }
    mapped.front() = 0.0;
    mapped.back() = 1.0;
    const QPath path(gauss(-4.0, 3.0), gauss(4.0, 1.0), QOrder(q));
    const QPath scaled(gauss(-4.0, 3.0), gauss(4.0, 1.0).scaled(log_c), QOrder(q));
    const AisResult a = run_ais(path, Schedule(mapped), cfg, 200, RngStream(21, 0));
    const AisResult b = run_ais(scaled, s, cfg, 200, RngStream(21, 0));
    ASSERT_EQ(a.log_weights.size(), b.log_weights.size());
    EXPECT_NEAR(b.log_ratio_estimate - a.log_ratio_estimate, log_c, 1e-10);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.log_weights.size(); ++i) {
      worst = std::max(worst, std::abs(b.log_weights[i] - a.log_weights[i] - log_c));
    }
    EXPECT_LE(worst, 1e-10) << "q = " << q;
  }
}

TEST(Ais, FrozenChainTelescopes) {
  const DensityHandle base = gauss(-4.0, 3.0);
  const DensityHandle target = gauss(4.0, 1.0);
  for (double q : {0.0, 0.5, 1.0}) {
    const QPath path(base, target, QOrder(q));
    for (std::size_t T : {10u, 100u, 1000u}) {
      const RngStream rng(4, T);
      const AisResult r = run_ais(path, linear_schedule(T), frozen(), 50, rng);
      ASSERT_EQ(r.log_weights.size(), 50u);
      for (std::size_t c = 0; c < 50; ++c) {
        RngStream sub = rng.substream(c);
        const Point z0 = base.sample(sub);
        const double exact = target.log_density(z0) - base.log_density(z0);
        EXPECT_NEAR(r.log_weights[c], exact, 1e-10 * std::max(1.0, std::abs(exact)))
            << "q = " << q << " T = " << T;
      }
    }
  }
}

DensityHandle target_with_nan_above(double cut) {
  const DensityHandle inner = gauss(0.5, 1.0);
  return DensityHandle(1, [inner, cut](const Point& z) {
    return z[0] > cut ? std::nan("") : inner.log_density(z);
  });
}

TEST(Ais, InvalidChainsWithinBudgetAreDropped) {
  const QPath path(gauss(0.0, 1.0), target_with_nan_above(2.5), QOrder(1.0));
  const AisResult r = run_ais(path, linear_schedule(1), HmcConfig{}, 10000, RngStream(2, 0));
  EXPECT_GT(r.n_invalid, 0u);
  EXPECT_LE(r.n_invalid, 100u);
  EXPECT_EQ(r.log_weights.size() + r.n_invalid, 10000u);
  for (double w : r.log_weights) EXPECT_FALSE(std::isnan(w));
}

TEST(Ais, InvalidChainsOverBudgetFail) {
  const QPath path(gauss(0.0, 1.0), target_with_nan_above(2.0), QOrder(1.0));
  EXPECT_THROW(run_ais(path, linear_schedule(1), HmcConfig{}, 10000, RngStream(2, 0)), NumericalFailure);
}

TEST(Ais, NanRegionInsideTrajectoriesIsRejected) {
  const QPath path(gauss(0.0, 1.0), target_with_nan_above(3.0), QOrder(0.5));
  const AisResult r = run_ais(path, linear_schedule(10), HmcConfig{}, 2000, RngStream(7, 0));
  EXPECT_LE(r.n_invalid, 20u);
}

TEST(Ais, NeedsBaseSampler) {
  const DensityHandle bare(1, [](const Point& z) { return -0.5 * z.squaredNorm(); });
  const QPath path(bare, gauss(0.0, 1.0), QOrder(1.0));
  EXPECT_THROW(run_ais(path, linear_schedule(3), HmcConfig{}, 10, RngStream(1, 0)), CapabilityError);
}

TEST(Ais, RejectsBadArguments) {
  const QPath path(gauss(0.0, 1.0), gauss(1.0, 1.0), QOrder(1.0));
  EXPECT_THROW(run_ais(path, linear_schedule(3), HmcConfig{}, 0, RngStream(1, 0)), PreconditionError);
  HmcConfig bad;
  bad.step_size = -1.0;
  EXPECT_THROW(run_ais(path, linear_schedule(3), bad, 10, RngStream(1, 0)), PreconditionError);
}

TEST(Bdmc, IdenticalEndpointsGiveZeroBounds) {
  const QPath path(gauss(2.0, 0.5), gauss(2.0, 0.5), QOrder(0.5));
  const BdmcResult r = run_bdmc(path, linear_schedule(10), HmcConfig{}, 100, RngStream(1, 0));
  EXPECT_EQ(r.lower, 0.0);
  EXPECT_EQ(r.upper, 0.0);
  EXPECT_EQ(r.gap, 0.0);
}

TEST(Bdmc, GapShrinksWithSteps) {
  const QPath path(gauss(0.0, 1.0), gauss(3.0, 1.0), QOrder(1.0));
  const BdmcResult coarse = run_bdmc(path, linear_schedule(3), HmcConfig{}, 300, RngStream(1, 0));
  const BdmcResult fine = run_bdmc(path, linear_schedule(60), HmcConfig{}, 300, RngStream(1, 0));
  EXPECT_LE(coarse.lower, coarse.upper);
  EXPECT_LE(fine.lower, fine.upper);
  EXPECT_LT(fine.gap, coarse.gap);
  EXPECT_LE(fine.lower, 0.05);
  EXPECT_GE(fine.upper, -0.05);
}

TEST(Bdmc, NeedsTargetSampler) {
  const DensityHandle bare(1, [](const Point& z) { return -0.5 * z.squaredNorm(); });
  const QPath path(gauss(0.0, 1.0), bare, QOrder(1.0));
  EXPECT_THROW(run_bdmc(path, linear_schedule(3), HmcConfig{}, 10, RngStream(1, 0)), CapabilityError);
}

std::vector<Eigen::MatrixXd> invariant_kernels(const Eigen::VectorXd& b, const Eigen::VectorXd& t,
                                               QOrder q, const Schedule& s) {
  std::vector<Eigen::MatrixXd> out;
  for (std::size_t i = 1; i <= s.steps(); ++i) out.push_back(metropolis_kernel(discrete_path(b, t, q, s[i])));
  return out;
}

TEST(Enumeration, ThreeStateExample) {
  const Eigen::VectorXd base = Eigen::Vector3d(1.0, 1.0, 1.0);
  const Eigen::VectorXd target = Eigen::Vector3d(1.0, 2.0, 3.0);
  const Schedule s = linear_schedule(2);
  for (double q : {1.0, 0.5}) {
    const auto r = enumerate_discrete_ais(base, target, QOrder(q), s, invariant_kernels(base, target, QOrder(q), s));
    EXPECT_NEAR(r.direct_ratio, 2.0, 1e-15);
    EXPECT_NEAR(r.expected_weight, 2.0, 1e-12) << "q = " << q;
  }
}

TEST(Enumeration, UnbiasedOnRandomInstances) {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> mass(0.1, 5.0);
  std::uniform_int_distribution<int> states(2, 5);
  std::uniform_int_distribution<int> steps(1, 4);
  const double qs[] = {0.0, 0.5, 1.0, 2.0};
  for (int i = 0; i < 50; ++i) {
    const int n = states(gen);
    Eigen::VectorXd b(n);
    Eigen::VectorXd t(n);
    for (int j = 0; j < n; ++j) {
      b[j] = mass(gen);
      t[j] = mass(gen);
    }
    const QOrder q(qs[i % 4]);
    const Schedule s = linear_schedule(static_cast<std::size_t>(steps(gen)));
    const auto r = enumerate_discrete_ais(b, t, q, s, invariant_kernels(b, t, q, s));
    EXPECT_NEAR(r.expected_weight / r.direct_ratio, 1.0, 1e-10) << "instance " << i;
  }
}

TEST(Enumeration, RejectsKernelThatIsNotInvariant) {
  const Eigen::VectorXd base = Eigen::Vector3d(1.0, 1.0, 1.0);
  const Eigen::VectorXd target = Eigen::Vector3d(1.0, 2.0, 3.0);
  const Schedule s = linear_schedule(2);
  auto kernels = invariant_kernels(base, target, QOrder(1.0), s);
  kernels[1] = metropolis_kernel(base);
  try {
    enumerate_discrete_ais(base, target, QOrder(1.0), s, kernels);
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_NE(std::string(e.what()).find("t = 2"), std::string::npos) << e.what();
  }
}

TEST(Enumeration, RejectsBadShapes) {
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  EXPECT_THROW(enumerate_discrete_ais(one, one, QOrder(1.0), linear_schedule(1), {Eigen::MatrixXd::Ones(1, 1)}),
               PreconditionError);
  const Eigen::VectorXd b = Eigen::Vector3d(1.0, 1.0, 1.0);
  EXPECT_THROW(enumerate_discrete_ais(b, b, QOrder(1.0), linear_schedule(7),
                                      std::vector<Eigen::MatrixXd>(7, Eigen::MatrixXd::Identity(3, 3))),
               PreconditionError);
  EXPECT_THROW(enumerate_discrete_ais(b, b, QOrder(1.0), linear_schedule(2), {Eigen::MatrixXd::Identity(3, 3)}),
               PreconditionError);
  Eigen::MatrixXd leaky = Eigen::MatrixXd::Identity(3, 3);
  leaky(0, 0) = 0.9;
  EXPECT_THROW(enumerate_discrete_ais(b, b, QOrder(1.0), linear_schedule(1), {leaky}), PreconditionError);
}

}  // namespace
}  // namespace qpaths
