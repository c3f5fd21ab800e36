#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "qpaths/divergence.hpp"
#include "qpaths/errors.hpp"
#include "qpaths/qpath.hpp"

namespace qpaths {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Point p1(double x) {
  Point z(1);
  z[0] = x;
  return z;
}

QPath gaussian_pair(double q) {
  return QPath(make_gaussian(GaussianSpec::univariate(-4.0, 3.0)),
               make_gaussian(GaussianSpec::univariate(4.0, 1.0)), QOrder(q));
}

QPath student_pair(double q) {
  return QPath(make_student_t(StudentTSpec::univariate(-4.0, 3.0, 1.0)),
               make_student_t(StudentTSpec::univariate(4.0, 1.0, 1.0)), QOrder(q));
}

TEST(Schedule, Invariants) {
  EXPECT_THROW(Schedule({0.0}), PreconditionError);
  EXPECT_THROW(Schedule({0.1, 1.0}), PreconditionError);
  EXPECT_THROW(Schedule({0.0, 0.9}), PreconditionError);
  EXPECT_THROW(Schedule({0.0, 0.5, 0.5, 1.0}), PreconditionError);
  EXPECT_THROW(Schedule({0.0, 0.6, 0.4, 1.0}), PreconditionError);
  EXPECT_NO_THROW(Schedule({0.0, 0.3, 1.0}));
}

TEST(Schedule, Linear) {
  EXPECT_THROW(linear_schedule(0), PreconditionError);
  EXPECT_EQ(linear_schedule(1).betas(), (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(linear_schedule(4).betas(), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  const Schedule s = linear_schedule(100);
  ASSERT_EQ(s.betas().size(), 101u);
  EXPECT_EQ(s.steps(), 100u);
  for (std::size_t t = 1; t <= 100; ++t) EXPECT_NEAR(s[t] - s[t - 1], 0.01, 1e-15);
}

TEST(Schedule, Reflected) {
  const Schedule s({0.0, 0.1, 0.5, 1.0});
  const Schedule r = s.reflected();
  EXPECT_EQ(r.betas().size(), 4u);
  EXPECT_EQ(r[0], 0.0);
  EXPECT_DOUBLE_EQ(r[1], 0.5);
  EXPECT_DOUBLE_EQ(r[2], 0.9);
  EXPECT_EQ(r[3], 1.0);
}

TEST(QPath, RejectsMismatchedDimensions) {
  EXPECT_THROW(QPath(make_gaussian(GaussianSpec::univariate(0, 1)),
                     make_gaussian(GaussianSpec{Eigen::Vector2d::Zero(), Eigen::MatrixXd(Eigen::MatrixXd::Identity(2, 2))}),
                     QOrder(1.0)),
               PreconditionError);
}

TEST(QPath, BetaOutsideUnitIntervalRejected) {
  const QPath p = gaussian_pair(0.5);
  EXPECT_THROW((void)p.log_density_at(-0.1, p1(0.0)), PreconditionError);
  EXPECT_THROW((void)p.log_density_at(1.5, p1(0.0)), PreconditionError);
  EXPECT_THROW((void)p.grad_log_density_at(1.5, p1(0.0)), PreconditionError);
}

TEST(QPath, EndpointsExact) {
  std::mt19937_64 gen(1);
  std::normal_distribution<double> n(0.0, 6.0);
  for (double q : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
    const QPath p = gaussian_pair(q);
    for (int i = 0; i < 50; ++i) {
      const Point z = p1(n(gen));
      EXPECT_EQ(p.log_density_at(0.0, z), p.base().log_density(z));
      EXPECT_EQ(p.log_density_at(1.0, z), p.target().log_density(z));
    }
  }
}

TEST(QPath, GeometricBranchExact) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n(0.0, 6.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const QPath p = gaussian_pair(1.0);
  for (int i = 0; i < 200; ++i) {
    const Point z = p1(n(gen));
    const double beta = u(gen);
    const double l0 = p.base().log_density(z);
    const double l1 = p.target().log_density(z);
    EXPECT_EQ(p.log_density_at(beta, z), (1.0 - beta) * l0 + beta * l1);
  }
}

TEST(QPath, MatchesHighPrecisionClosedForm) {
  const QPath p = gaussian_pair(0.5);
  for (double z : {0.0, -7.0, 3.3, 12.0}) {
    using oracle::mp;
    const mp w0 = oracle::gaussian_pdf(mp(z), mp(-4), mp(3));
    const mp w1 = oracle::gaussian_pdf(mp(z), mp(4), mp(1));
    const mp want = log(oracle::power_mean({mp(0.5), mp(0.5)}, {w0, w1}, mp(0.5)));
    EXPECT_NEAR(p.log_density_at(0.5, p1(z)), static_cast<double>(want), 1e-13 * (1 + std::abs(static_cast<double>(want))));
  }
}

TEST(QPath, MixtureLimit) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0.0, 5.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const QPath p = gaussian_pair(0.0);
  for (int i = 0; i < 200; ++i) {
    const Point z = p1(n(gen));
    const double beta = u(gen);
    const double mix = (1.0 - beta) * std::exp(p.base().log_density(z)) + beta * std::exp(p.target().log_density(z));
    EXPECT_LE(std::abs(std::exp(p.log_density_at(beta, z)) - mix) / mix, 1e-12);
  }
}

TEST(QPath, MonotoneInBetaWhereTargetDominates) {
  for (double q : {-1.0, 0.0, 0.5, 0.9, 1.0, 2.0}) {
    const QPath p = gaussian_pair(q);
    for (double z : {2.0, 4.0, 6.0}) {
      ASSERT_GT(p.target().log_density(p1(z)), p.base().log_density(p1(z)));
      double prev = -kInf;
      for (int k = 0; k <= 200; ++k) {
        const double v = p.log_density_at(k / 200.0, p1(z));
        EXPECT_GE(v, prev - 1e-14 * std::abs(prev)) << q << " " << z << " " << k;
        prev = v;
      }
    }
  }
}

TEST(QPath, ZeroDensityHandling) {
  // base vanishes for z < 0
  const DensityHandle half(1, [](const Point& z) { return z[0] < 0.0 ? -kInf : -z[0]; },
                           [](const Point&, Point& g) { g[0] = -1.0; });
  const DensityHandle normal = make_gaussian(GaussianSpec::univariate(0.0, 1.0));
  const Point neg = p1(-1.0);
  EXPECT_EQ(QPath(half, normal, QOrder(1.0)).log_density_at(0.5, neg), -kInf);
  EXPECT_EQ(QPath(half, normal, QOrder(2.0)).log_density_at(0.5, neg), -kInf);
  const QPath mix(half, normal, QOrder(0.0));
  EXPECT_NEAR(mix.log_density_at(0.5, neg), std::log(0.5) + normal.log_density(neg), 1e-14);
  EXPECT_THROW((void)QPath(half, normal, QOrder(1.0)).grad_log_density_at(0.5, neg), GradientUndefinedError);
  // q < 1: only the target contributes to the gradient
  EXPECT_NEAR(mix.grad_log_density_at(0.5, neg)[0], 1.0, 1e-14);
  EXPECT_THROW((void)mix.sufficient_statistic(neg), DomainError);
}

TEST(QPath, GradientEndpointsAndGeometric) {
  const QPath p = gaussian_pair(1.0);
  const Point z = p1(1.7);
  EXPECT_EQ(p.grad_log_density_at(0.0, z)[0], p.base().grad_log_density(z)[0]);
  EXPECT_EQ(p.grad_log_density_at(1.0, z)[0], p.target().grad_log_density(z)[0]);
  const double g0 = p.base().grad_log_density(z)[0];
  const double g1 = p.target().grad_log_density(z)[0];
  EXPECT_NEAR(p.grad_log_density_at(0.3, z)[0], 0.7 * g0 + 0.3 * g1, 1e-15);
}

double fd_rel_error(const QPath& p, double beta, const Point& z) {
  const Point g = p.grad_log_density_at(beta, z);
  Point fd(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double h = 1e-5 * (1.0 + std::abs(z[i]));
    Point a = z;
    Point b = z;
    a[i] += h;
    b[i] -= h;
    fd[i] = (p.log_density_at(beta, a) - p.log_density_at(beta, b)) / (2.0 * h);
  }
  return (g - fd).norm() / std::max(g.norm(), 1.0);
}

TEST(QPath, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> n(0.0, 4.0);
  const QPath p = gaussian_pair(0.5);
  for (int i = 0; i < 20; ++i) EXPECT_LE(fd_rel_error(p, 0.3, p1(n(gen))), 1e-5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double q : {-1.0, 0.0, 0.5, 0.9, 1.0, 1.5, 2.0}) {
    const QPath g = gaussian_pair(q);
    const QPath t = student_pair(q);
    for (int i = 0; i < 20; ++i) {
      const double beta = u(gen);
      const Point z = p1(n(gen));
      EXPECT_LE(fd_rel_error(g, beta, z), 1e-5) << q;
      EXPECT_LE(fd_rel_error(t, beta, z), 1e-5) << q;
    }
  }
}

TEST(QPath, ValueAndGradientConsistent) {
  const QPath p = student_pair(0.7);
  GradientScratch scratch;
  Point g;
  for (double z : {-5.0, 0.0, 2.0}) {
    const double v = p.value_and_gradient(0.4, p1(z), g, scratch);
    EXPECT_EQ(v, p.log_density_at(0.4, p1(z)));
    EXPECT_EQ(g[0], p.grad_log_density_at(0.4, p1(z))[0]);
  }
}

TEST(SufficientStatistic, Examples) {
  const DensityHandle a = make_gaussian(GaussianSpec::univariate(0.0, 1.0));
  for (double q : {0.0, 0.5, 1.0, 2.0}) EXPECT_EQ(QPath(a, a, QOrder(q)).sufficient_statistic(p1(0.4)), 0.0);
  const QPath g = gaussian_pair(1.0);
  const Point z = p1(0.8);
  EXPECT_EQ(g.sufficient_statistic(z), g.target().log_density(z) - g.base().log_density(z));
  // l1 - l0 = log 4 at q = 0.5 gives ln_q(4) = 2
  const QPath s(a, a.scaled(std::log(4.0)), QOrder(0.5));
  EXPECT_NEAR(s.sufficient_statistic(z), 2.0, 1e-15);
}

TEST(QExpForm, MatchesPowerMean) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 4.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double q : {-1.0, 0.0, 0.3, 0.5, 0.9, 1.0, 1.2, 2.0}) {
    for (const QPath& p : {gaussian_pair(q), student_pair(q)}) {
      EXPECT_EQ(p.q_exp_form_check(0.0, p1(1.0)), p.base().log_density(p1(1.0)));
      for (int i = 0; i < 100; ++i) {
        const double beta = u(gen);
        const Point z = p1(n(gen));
        const double a = p.log_density_at(beta, z);
        const double b = p.q_exp_form_check(beta, z);
        EXPECT_LE(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(a))) << q << " " << beta << " " << z[0];
      }
    }
  }
  const QPath p = gaussian_pair(0.5);
  EXPECT_NEAR(p.q_exp_form_check(0.7, p1(0.3)), p.log_density_at(0.7, p1(0.3)), 1e-10);
}

TEST(QPath, ReversedMirrorsBeta) {
  const QPath p = gaussian_pair(0.5);
  const QPath r = p.reversed();
  for (double beta : {0.0, 0.25, 0.5, 1.0}) {
    EXPECT_NEAR(r.log_density_at(1.0 - beta, p1(0.7)), p.log_density_at(beta, p1(0.7)), 1e-14);
  }
}

TEST(EstimatePartition, BetaZeroIsExact) {
  RngStream rng(1, 1);
  const PartitionEstimate e = estimate_partition(gaussian_pair(0.5), 0.0, 1000, rng);
  EXPECT_EQ(e.log_z, 0.0);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.n_samples, 1000u);
}

TEST(EstimatePartition, GeometricEndpoint) {
  RngStream rng(2, 1);
  // target is far from base; use a closer pair for a usable importance sampler
  const QPath p(make_gaussian(GaussianSpec::univariate(0.0, 1.0)),
                make_gaussian(GaussianSpec::univariate(0.5, 1.0)), QOrder(1.0));
  const PartitionEstimate e = estimate_partition(p, 1.0, 100000, rng);
  EXPECT_LE(std::abs(e.log_z), 3.0 * e.std_error);
  EXPECT_GT(e.std_error, 0.0);
}

TEST(EstimatePartition, MatchesQuadrature) {
  // Base with standard deviation 3 keeps exp_q(beta phi) square-integrable with
  // modest variance; the variance-3 base is covered by the acceptance suite.
  const QPath p(make_gaussian(GaussianSpec::univariate(-4.0, 9.0)),
                make_gaussian(GaussianSpec::univariate(4.0, 1.0)), QOrder(0.5));
  const double want = std::log(oracle::integrate_pieces(
      [&](double x) { return std::exp(p.log_density_at(0.5, p1(x))); }, {-60.0, -4.0, 0.0, 4.0, 40.0}));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream rng(seed, 1);
    const PartitionEstimate e = estimate_partition(p, 0.5, 100000, rng);
    EXPECT_LE(std::abs(e.log_z - want), 3.0 * e.std_error) << e.log_z << " vs " << want;
  }
}

TEST(EstimatePartition, Deterministic) {
  const QPath p = gaussian_pair(0.5);
  RngStream a(9, 4);
  RngStream b(9, 4);
  EXPECT_EQ(estimate_partition(p, 0.5, 1000, a).log_z, estimate_partition(p, 0.5, 1000, b).log_z);
}

TEST(EstimatePartition, NeedsCapabilities) {
  const DensityHandle bare(1, [](const Point& z) { return -0.5 * z[0] * z[0]; });
  RngStream rng(4, 1);
  EXPECT_THROW(estimate_partition(QPath(bare, bare, QOrder(0.5)), 0.5, 10, rng), CapabilityError);
  const DensityHandle sampled_only(
      1, [](const Point& z) { return -0.5 * z[0] * z[0]; }, {},
      [](RngStream& r) { return p1(r.normal()); });
  EXPECT_THROW(estimate_partition(QPath(sampled_only, sampled_only, QOrder(0.5)), 0.5, 10, rng), CapabilityError);
}

TEST(Reparameterize, Examples) {
  const BetaParameterization a = reparameterize_theta_to_beta(0.4, 1.3, QOrder(1.0));
  EXPECT_EQ(a.beta, 0.4);
  EXPECT_EQ(a.log_z, 1.3);
  const BetaParameterization b = reparameterize_theta_to_beta(1.0, 0.2, QOrder(0.5));
  EXPECT_NEAR(b.beta, 1.0 / 0.9, 1e-15);
  EXPECT_NEAR(b.log_z, -std::log(0.81), 1e-15);
  EXPECT_THROW(reparameterize_theta_to_beta(1.0, 2.0, QOrder(0.5)), DegenerateInputError);
  EXPECT_THROW(reparameterize_theta_to_beta(1.0, 3.0, QOrder(0.5)), DegenerateInputError);
}

TEST(Reparameterize, RoundTrip) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double q : {0.0, 0.5, 0.9, 1.0, 1.5, 2.0}) {
    for (int i = 0; i < 100; ++i) {
      const double theta = 2.0 * u(gen);
      const double psi = 0.4 * u(gen);
      const BetaParameterization b = reparameterize_theta_to_beta(theta, psi, QOrder(q));
      const ThetaParameterization t = reparameterize_beta_to_theta(b.beta, b.log_z, QOrder(q));
      EXPECT_NEAR(t.theta, theta, 1e-12);
      EXPECT_NEAR(t.psi, psi, 1e-12);
    }
  }
}

std::vector<Point> grid_101() {
  std::vector<Point> g;
  for (int i = 0; i <= 100; ++i) g.push_back(p1(-10.0 + 0.2 * i));
  return g;
}

TEST(FamilyClosure, GaussianGeometric) {
  const auto grid = grid_101();
  const DensitySpec a = GaussianSpec::univariate(-4.0, 3.0);
  const DensitySpec b = GaussianSpec::univariate(4.0, 1.0);
  for (double beta : {0.0, 0.1, 0.5, 0.77, 1.0}) {
    EXPECT_LE(interpolated_member_check(ParametricFamily::kGaussianGeometric, a, b, QOrder(1.0), beta, grid), 1e-10);
  }
  EXPECT_EQ(interpolated_member_check(ParametricFamily::kGaussianGeometric, a, b, QOrder(1.0), 0.0, grid), 0.0);
}

TEST(FamilyClosure, StudentTOrderTwo) {
  const auto grid = grid_101();
  const DensitySpec a = StudentTSpec::univariate(-4.0, 3.0, 1.0);
  const DensitySpec b = StudentTSpec::univariate(4.0, 1.0, 1.0);
  for (double beta : {0.0, 0.3, 0.5, 0.9, 1.0}) {
    EXPECT_LE(interpolated_member_check(ParametricFamily::kStudentTQ, a, b, QOrder(2.0), beta, grid), 1e-10);
  }
}

TEST(FamilyClosure, StudentTOtherOrdersAndDimensions) {
  // nu = 3 in 1-d is q = 1.5; nu = 2 in 2-d is q = 1.5 as well
  const auto grid = grid_101();
  EXPECT_LE(interpolated_member_check(ParametricFamily::kStudentTQ, StudentTSpec::univariate(-1.0, 2.0, 3.0),
                                      StudentTSpec::univariate(2.0, 0.5, 3.0), QOrder(1.5), 0.4, grid),
            1e-10);
  Eigen::MatrixXd s0(2, 2);
  s0 << 2.0, 0.3, 0.3, 1.0;
  Eigen::MatrixXd s1(2, 2);
  s1 << 0.5, -0.1, -0.1, 1.5;
  std::vector<Point> grid2;
  for (int i = -5; i <= 5; ++i) {
    for (int j = -5; j <= 5; ++j) grid2.push_back(Eigen::Vector2d(1.3 * i, 0.9 * j));
  }
  EXPECT_LE(interpolated_member_check(ParametricFamily::kStudentTQ,
                                      StudentTSpec{Eigen::Vector2d(-1, 1), s0, 2.0},
                                      StudentTSpec{Eigen::Vector2d(2, 0), s1, 2.0}, QOrder(1.5), 0.6, grid2),
            1e-10);
}

TEST(FamilyClosure, WrongPairingsRejected) {
  const auto grid = grid_101();
  const DensitySpec g = GaussianSpec::univariate(0.0, 1.0);
  const DensitySpec t = StudentTSpec::univariate(0.0, 1.0, 1.0);
  const DensitySpec t3 = StudentTSpec::univariate(0.0, 1.0, 3.0);
  EXPECT_THROW(interpolated_member_check(ParametricFamily::kGaussianGeometric, g, g, QOrder(0.5), 0.5, grid), PreconditionError);
  EXPECT_THROW(interpolated_member_check(ParametricFamily::kGaussianGeometric, g, t, QOrder(1.0), 0.5, grid), PreconditionError);
  EXPECT_THROW(interpolated_member_check(ParametricFamily::kStudentTQ, t, t, QOrder(1.5), 0.5, grid), PreconditionError);
  EXPECT_THROW(interpolated_member_check(ParametricFamily::kStudentTQ, t, t3, QOrder(2.0), 0.5, grid), PreconditionError);
}

TEST(FamilyClosure, GeometricStudentPathLeavesFamily) {
  // q = 1 between Student-t endpoints is not a Student-t: the check must notice
  const auto grid = grid_101();
  const QPath p = student_pair(1.0);
  const DensityHandle member = make_density(interpolated_member(
      ParametricFamily::kStudentTQ, StudentTSpec::univariate(-4.0, 3.0, 1.0),
      StudentTSpec::univariate(4.0, 1.0, 1.0), QOrder(2.0), 0.5));
  const double off = p.log_density_at(0.5, grid[50]) - member.log_density(grid[50]);
  double worst = 0.0;
  for (const Point& z : grid) worst = std::max(worst, std::abs(p.log_density_at(0.5, z) - member.log_density(z) - off));
  EXPECT_GT(worst, 1e-2);
}

}  // namespace
}  // namespace qpaths
