#include "selftest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qpaths/ais.hpp"
#include "qpaths/deformed_math.hpp"
#include "qpaths/harness/result_io.hpp"
#include "qpaths/qpath.hpp"

namespace qpaths::tool {

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

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

struct Check {
  const char* name;
  double tolerance;
  std::function<double()> worst;  // largest observed error
};

double inverse_pair() {
  double worst = 0.0;
  for (double q : {-1.0, 0.0, 0.5, 0.9, 1.0, 1.1, 2.0, 3.0}) {
    for (double e = -6.0; e <= 6.0; e += 0.1) {
      const double u = std::pow(10.0, e);
      if (q != 1.0 && std::pow(u, 1.0 - q) < 1e-2) continue;  // ill-conditioned round trip
      worst = std::max(worst, rel(exp_q(ln_q(u, QOrder(q)), QOrder(q)), u));
    }
  }
  return worst;
}

double homogeneity() {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = 0.0;
  for (double q : {-1.0, 0.0, 0.5, 1.0, 2.0}) {
    for (int i = 0; i < 50; ++i) {
      const double w0 = unit(gen);
      const std::array<double, 2> w{w0, 1.0 - w0};
      const std::array<double, 2> u{std::exp(4 * unit(gen) - 2), std::exp(4 * unit(gen) - 2)};
      const double c = std::exp(6 * unit(gen) - 3);
      const std::array<double, 2> cu{c * u[0], c * u[1]};
      worst = std::max(worst, rel(power_mean(w, cu, QOrder(q)), c * power_mean(w, u, QOrder(q))));
    }
  }
  return worst;
}

double identities() {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> x(-0.15, 0.15);
  double worst = 0.0;
  for (double q : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    for (int i = 0; i < 50; ++i) {
      std::vector<double> xs(1 + i % 4);
      for (double& v : xs) v = x(gen);
      const QIdentityResiduals r = q_identity_residuals(xs, QOrder(q));
      worst = std::max({worst, r.sum_identity, r.product_identity});
    }
  }
  return worst;
}

double endpoints() {
  double worst = 0.0;
  for (double q : {0.0, 0.5, 1.0, 2.0}) {
    const QPath p = student_pair(q);
    for (double z : {-9.0, -1.0, 0.5, 6.0}) {
      worst = std::max(worst, std::abs(p.log_density_at(0.0, p1(z)) - p.base().log_density(p1(z))));
      worst = std::max(worst, std::abs(p.log_density_at(1.0, p1(z)) - p.target().log_density(p1(z))));
    }
  }
  return worst;
}

double mixture_limit() {
  const QPath p = gaussian_pair(0.0);
  double worst = 0.0;
  for (double beta : {0.1, 0.5, 0.9}) {
    for (double z : {-8.0, -2.0, 0.0, 3.0, 7.0}) {
      const double want = (1 - beta) * std::exp(p.base().log_density(p1(z))) + beta * std::exp(p.target().log_density(p1(z)));
      worst = std::max(worst, rel(std::exp(p.log_density_at(beta, p1(z))), want));
    }
  }
  return worst;
}

double q_exp_form() {
  double worst = 0.0;
  for (double q : {0.0, 0.5, 0.9, 1.0, 2.0}) {
    for (const QPath& p : {gaussian_pair(q), student_pair(q)}) {
      for (double beta : {0.2, 0.6}) {
        for (double z : {-6.0, 0.0, 5.0}) {
          const double a = p.log_density_at(beta, p1(z));
          worst = std::max(worst, std::abs(a - p.q_exp_form_check(beta, p1(z))) / std::max(1.0, std::abs(a)));
        }
      }
    }
  }
  return worst;
}

double family_closure() {
  std::vector<Point> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(p1(-10.0 + 0.2 * i));
  return std::max(
      interpolated_member_check(ParametricFamily::kGaussianGeometric, GaussianSpec::univariate(-4.0, 3.0),
                                GaussianSpec::univariate(4.0, 1.0), QOrder(1.0), 0.4, grid),
      interpolated_member_check(ParametricFamily::kStudentTQ, StudentTSpec::univariate(-4.0, 3.0, 1.0),
                                StudentTSpec::univariate(4.0, 1.0, 1.0), QOrder(2.0), 0.3, grid));
}

double gradients() {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(0.0, 4.0);
  double worst = 0.0;
  for (double q : {0.0, 0.5, 1.0, 2.0}) {
    for (const QPath& p : {gaussian_pair(q), student_pair(q)}) {
      for (int i = 0; i < 5; ++i) {
        const Point z = p1(n(gen));
        const double g = p.grad_log_density_at(0.4, z)[0];
        const double h = 1e-5 * (1.0 + std::abs(z[0]));
        const double fd = (p.log_density_at(0.4, p1(z[0] + h)) - p.log_density_at(0.4, p1(z[0] - h))) / (2 * h);
        worst = std::max(worst, std::abs(g - fd) / std::max(std::abs(g), 1.0));
      }
    }
  }
  return worst;
}

double enumeration() {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> mass(0.1, 5.0);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Eigen::VectorXd b(3);
    Eigen::VectorXd t(3);
    for (int j = 0; j < 3; ++j) {
      b[j] = mass(gen);
      t[j] = mass(gen);
    }
    constexpr std::array<double, 4> qs{0.0, 0.5, 1.0, 2.0};
    const QOrder q(qs[static_cast<std::size_t>(i) % qs.size()]);
    const Schedule s = linear_schedule(3);
    std::vector<Eigen::MatrixXd> k;
    for (std::size_t t_ = 1; t_ <= 3; ++t_) k.push_back(metropolis_kernel(discrete_path(b, t, q, s[t_])));
    const auto r = enumerate_discrete_ais(b, t, q, s, k);
    worst = std::max(worst, rel(r.expected_weight, r.direct_ratio));
  }
  return worst;
}

double identical_endpoints() {
  const DensityHandle g = make_gaussian(GaussianSpec::univariate(0.3, 2.0));
  double worst = 0.0;
  for (double q : {0.0, 0.5, 1.0}) {
    const AisResult r = run_ais(QPath(g, g, QOrder(q)), linear_schedule(10), HmcConfig{}, 50, RngStream(1, 0));
    for (double w : r.log_weights) worst = std::max(worst, std::abs(w));
  }
  return worst;
}

double csv_round_trip() {
  std::vector<harness::ResultRow> rows(2);
  rows[0].q = 0.9;
  rows[0].T = 100;
  rows[0].log_lower = -0.0123456789012345;
  rows[0].log_upper = std::nan("");
  rows[0].z_estimate = std::exp(rows[0].log_lower);
  rows[0].ess = 1234.5678;
  rows[1] = rows[0];
  rows[1].mode = harness::Mode::kBdmc;
  rows[1].log_upper = 1.0 / 3.0;
  std::stringstream ss;
  harness::write_csv(ss, rows);
  const auto back = harness::read_csv(ss);
  if (back.size() != rows.size()) return 1.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!harness::same_row(rows[i], back[i])) return 1.0;
  }
  return 0.0;
}

}  // namespace

bool run_selftest(std::ostream& out, bool quiet) {
  const std::vector<Check> checks{
      {"ln_q / exp_q inverse pair (well-conditioned range)", 1e-12, inverse_pair},
      {"power mean homogeneity", 1e-12, homogeneity},
      {"q-exponential sum/product identities", 1e-10, identities},
      {"q-path endpoints", 0.0, endpoints},
      {"q = 0 mixture limit", 1e-12, mixture_limit},
      {"q-exponential family form", 1e-10, q_exp_form},
      {"parametric family closure", 1e-10, family_closure},
      {"path gradient vs finite differences", 1e-5, gradients},
      {"discrete AIS unbiasedness", 1e-12, enumeration},
      {"identical endpoints give zero log-weights", 0.0, identical_endpoints},
      {"CSV round trip", 0.0, csv_round_trip},
  };
  bool ok = true;
  for (const Check& c : checks) {
    double worst;
    bool pass;
    try {
      worst = c.worst();
      pass = worst <= c.tolerance;
    } catch (const std::exception& e) {
      out << "FAIL  " << c.name << ": " << e.what() << '\n';
      ok = false;
      continue;
    }
    ok = ok && pass;
    if (!pass || !quiet) {
      out << (pass ? "PASS  " : "FAIL  ") << c.name << "  (worst " << worst << ", tol " << c.tolerance << ")\n";
    }
  }
  if (!quiet) out << (ok ? "selftest passed" : "selftest FAILED") << '\n';
  return ok;
}

}  // namespace qpaths::tool
