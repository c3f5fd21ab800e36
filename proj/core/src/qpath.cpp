#include "qpaths/qpath.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "qpaths/errors.hpp"
#include "qpaths/log_weights.hpp"

namespace qpaths {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

Schedule::Schedule(std::vector<double> betas) : betas_(std::move(betas)) {
  if (betas_.size() < 2) {
    throw PreconditionError("schedule needs at least two betas");
  }
  if (betas_.front() != 0.0 || betas_.back() != 1.0) {
    throw PreconditionError("schedule must start at 0 and end at 1");
  }
  for (std::size_t t = 1; t < betas_.size(); ++t) {
    if (!(betas_[t] > betas_[t - 1])) {
      std::ostringstream os;
      os << "schedule must be strictly increasing (index " << t << ")";
      throw PreconditionError(os.str());
    }
  }
}

Schedule Schedule::reflected() const {
  std::vector<double> out(betas_.size());
  const std::size_t T = steps();
  for (std::size_t t = 0; t <= T; ++t) {
    out[t] = 1.0 - betas_[T - t];
  }
  out.front() = 0.0;
  out.back() = 1.0;
  return Schedule(std::move(out));
}

Schedule linear_schedule(std::size_t T) {
  if (T == 0) {
    throw PreconditionError("linear schedule needs T >= 1");
  }
  std::vector<double> betas(T + 1);
  for (std::size_t t = 0; t <= T; ++t) {
    betas[t] = static_cast<double>(t) / static_cast<double>(T);
  }
  return Schedule(std::move(betas));
}

QPath::QPath(DensityHandle base, DensityHandle target, QOrder q)
    : base_(std::move(base)), target_(std::move(target)), q_(q) {
  if (base_.dim() != target_.dim()) {
    throw PreconditionError("q-path endpoints must share a dimension");
  }
}

void QPath::check_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw PreconditionError("beta must lie in [0, 1]");
  }
}

double QPath::combine(double beta, double base_log, double target_log) const {
  check_beta(beta);
  if (beta == 0.0) return base_log;
  if (beta == 1.0) return target_log;
  if (std::isnan(base_log) || std::isnan(target_log)) {
    throw DomainError("endpoint log-density is NaN");
  }
  if (q_.is_log_branch()) {
    if (base_log == target_log) return base_log;
    return (1.0 - beta) * base_log + beta * target_log;
  }
  const std::array<double, 2> w{1.0 - beta, beta};
  const std::array<double, 2> l{base_log, target_log};
  return log_power_mean(w, l, q_);
}

double QPath::log_density_at(double beta, const Point& z) const {
  check_beta(beta);
  if (beta == 0.0) return base_.log_density(z);
  if (beta == 1.0) return target_.log_density(z);
  return combine(beta, base_.log_density(z), target_.log_density(z));
}

double QPath::value_and_gradient(double beta, const Point& z, Point& grad,
                                 GradientScratch& scratch) const {
  check_beta(beta);
  grad.resize(dim());
  if (beta == 0.0 || beta == 1.0) {
    const DensityHandle& h = beta == 0.0 ? base_ : target_;
    const double l = h.log_density(z);
    if (l == kNegInf) throw GradientUndefinedError("density is zero at this point");
    h.grad_log_density(z, grad);
    return l;
  }
  const double l0 = base_.log_density(z);
  const double l1 = target_.log_density(z);
  const double value = combine(beta, l0, l1);
  if (value == kNegInf) throw GradientUndefinedError("q-path density is zero at this point");

  // responsibilities r_i = w_i pi_i^{1-q} / sum_j w_j pi_j^{1-q}
  double r0;
  double r1;
  if (q_.is_log_branch()) {
    r0 = 1.0 - beta;
    r1 = beta;
  } else {
    const double s = q_.one_minus();
    const double a0 = l0 == kNegInf ? kNegInf : std::log1p(-beta) + s * l0;
    const double a1 = l1 == kNegInf ? kNegInf : std::log(beta) + s * l1;
    const double m = std::max(a0, a1);
    const double e0 = std::exp(a0 - m);
    const double e1 = std::exp(a1 - m);
    r0 = e0 / (e0 + e1);
    r1 = e1 / (e0 + e1);
  }
  grad.setZero();
  if (r0 > 0.0) {
    scratch.base_grad.resize(dim());
    base_.grad_log_density(z, scratch.base_grad);
    grad.noalias() += r0 * scratch.base_grad;
  }
  if (r1 > 0.0) {
    scratch.target_grad.resize(dim());
    target_.grad_log_density(z, scratch.target_grad);
    grad.noalias() += r1 * scratch.target_grad;
  }
  return value;
}

Point QPath::grad_log_density_at(double beta, const Point& z) const {
  Point g(dim());
  GradientScratch scratch;
  value_and_gradient(beta, z, g, scratch);
  return g;
}

double QPath::sufficient_statistic(const Point& z) const {
  const double l0 = base_.log_density(z);
  if (l0 == kNegInf) throw DomainError("sufficient statistic undefined where the base density is zero");
  const double d = target_.log_density(z) - l0;
  if (std::isnan(d)) throw DomainError("log-ratio is NaN");
  if (q_.is_log_branch()) return d;
  const double s = q_.one_minus();
  return std::expm1(s * d) / s;
}

double QPath::q_exp_form_check(double beta, const Point& z) const {
  check_beta(beta);
  const double l0 = base_.log_density(z);
  if (beta == 0.0) return l0;
  return l0 + log_exp_q(beta * sufficient_statistic(z), q_);
}

QPath QPath::reversed() const { return QPath(target_, base_, q_); }

PartitionEstimate estimate_partition(const QPath& path, double beta, std::size_t n_samples,
                                     RngStream& rng) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw PreconditionError("beta must lie in [0, 1]");
  if (n_samples == 0) throw PreconditionError("need at least one sample");
  const DensityHandle& base = path.base();
  if (!base.has_sampler()) throw CapabilityError("partition estimate needs a base sampler");
  if (!base.log_normalizer()) throw CapabilityError("partition estimate needs a known base normalizer");

  std::vector<double> s(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const Point z = base.sample(rng);
    s[i] = beta == 0.0 ? 0.0 : log_exp_q(beta * path.sufficient_statistic(z), path.q());
  }
  PartitionEstimate out;
  out.n_samples = n_samples;
  out.log_z = *base.log_normalizer() + log_mean_exp(s);
  out.ess = effective_sample_size(s);
  if (n_samples > 1) {
    double m = kNegInf;
    for (double v : s) m = std::max(m, v);
    double mean = 0.0;
    for (double v : s) mean += std::exp(v - m);
    mean /= static_cast<double>(n_samples);
    double var = 0.0;
    for (double v : s) {
      const double dv = std::exp(v - m) - mean;
      var += dv * dv;
    }
    var /= static_cast<double>(n_samples - 1);
    out.std_error = std::sqrt(var / static_cast<double>(n_samples)) / mean;
  }
  return out;
}

BetaParameterization reparameterize_theta_to_beta(double theta, double psi, QOrder q) {
  if (!std::isfinite(theta) || !std::isfinite(psi)) throw DomainError("theta and psi must be finite");
  if (q.is_log_branch()) return {theta, psi};
  const double denom = 1.0 - q.one_minus() * psi;
  if (!(denom > 0.0)) throw DegenerateInputError("1 - (1-q) psi must be positive");
  return {theta / denom, -log_exp_q(-psi, q)};
}

ThetaParameterization reparameterize_beta_to_theta(double beta, double log_z, QOrder q) {
  if (!std::isfinite(beta) || !std::isfinite(log_z)) throw DomainError("beta and log Z must be finite");
  if (q.is_log_branch()) return {beta, log_z};
  const double s = q.one_minus();
  const double psi = -std::expm1(-s * log_z) / s;
  return {beta * std::exp(-s * log_z), psi};
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw PreconditionError(what);
}

DensitySpec gaussian_member(const GaussianSpec& g0, const GaussianSpec& g1, double beta) {
  const Eigen::MatrixXd lambda0 = to_dense(g0.variance).inverse();
  const Eigen::MatrixXd lambda1 = to_dense(g1.variance).inverse();
  const Eigen::MatrixXd lambda = (1.0 - beta) * lambda0 + beta * lambda1;
  const Eigen::VectorXd eta = (1.0 - beta) * lambda0 * g0.mean + beta * lambda1 * g1.mean;
  Eigen::MatrixXd cov = lambda.inverse();
  cov = 0.5 * (cov + cov.transpose()).eval();
  return GaussianSpec{cov * eta, cov};
}

// pi(z)^{1-q} = k (1 + (z-mu)^T P (z-mu)) with P = (nu S)^{-1}, k = c^{1-q}
//             = k z^T P z - 2 k (P mu)^T z + k (1 + mu^T P mu)
struct TCoefficients {
  Eigen::MatrixXd quad;
  Eigen::VectorXd lin;
  double constant;
};

TCoefficients t_coefficients(const StudentTSpec& t, double one_minus_q) {
  const double log_c = make_student_t(t).log_density(t.mean);
  const double k = std::exp(one_minus_q * log_c);
  const Eigen::MatrixXd p = (t.dof * to_dense(t.scale)).inverse();
  const Eigen::VectorXd pm = p * t.mean;
  return {k * p, k * pm, k * (1.0 + t.mean.dot(pm))};
}

DensitySpec student_member(const StudentTSpec& t0, const StudentTSpec& t1, QOrder q, double beta) {
  const TCoefficients c0 = t_coefficients(t0, q.one_minus());
  const TCoefficients c1 = t_coefficients(t1, q.one_minus());
  const Eigen::MatrixXd quad = (1.0 - beta) * c0.quad + beta * c1.quad;
  const Eigen::VectorXd lin = (1.0 - beta) * c0.lin + beta * c1.lin;
  const double constant = (1.0 - beta) * c0.constant + beta * c1.constant;
  const Eigen::LLT<Eigen::MatrixXd> llt(quad);
  const Eigen::VectorXd mean = llt.solve(lin);
  const double k = constant - lin.dot(mean);
  if (!(k > 0.0)) throw DegenerateInputError("interpolated Student-t has non-positive offset");
  Eigen::MatrixXd scale = k * llt.solve(Eigen::MatrixXd::Identity(quad.rows(), quad.cols())) / t0.dof;
  scale = 0.5 * (scale + scale.transpose()).eval();
  return StudentTSpec{mean, scale, t0.dof};
}

}  // namespace

DensitySpec interpolated_member(ParametricFamily family, const DensitySpec& spec0,
                                const DensitySpec& spec1, QOrder q, double beta) {
  require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0, 1]");
  require(spec_dim(spec0) == spec_dim(spec1), "endpoint dimensions differ");
  switch (family) {
    case ParametricFamily::kGaussianGeometric: {
      const auto* g0 = std::get_if<GaussianSpec>(&spec0);
      const auto* g1 = std::get_if<GaussianSpec>(&spec1);
      require(g0 && g1, "Gaussian family needs Gaussian endpoints");
      require(q.is_log_branch(), "Gaussian family closure holds only for q = 1");
      return gaussian_member(*g0, *g1, beta);
    }
    case ParametricFamily::kStudentTQ: {
      const auto* t0 = std::get_if<StudentTSpec>(&spec0);
      const auto* t1 = std::get_if<StudentTSpec>(&spec1);
      require(t0 && t1, "Student-t family needs Student-t endpoints");
      require(t0->dof == t1->dof, "Student-t endpoints must share nu");
      require(std::abs(q.value() - q_from_nu(t0->dof, spec_dim(spec0))) <= 1e-12,
              "q must equal (nu + d + 2) / (nu + d)");
      return student_member(*t0, *t1, q, beta);
    }
  }
  throw PreconditionError("unknown family");
}

double interpolated_member_check(ParametricFamily family, const DensitySpec& spec0,
                                 const DensitySpec& spec1, QOrder q, double beta,
                                 std::span<const Point> grid) {
  require(!grid.empty(), "grid must not be empty");
  const DensityHandle member = make_density(interpolated_member(family, spec0, spec1, q, beta));
  const QPath path(make_density(spec0), make_density(spec1), q);
  const Point& mid = grid[grid.size() / 2];
  const double offset = path.log_density_at(beta, mid) - member.log_density(mid);
  double worst = 0.0;
  for (const Point& z : grid) {
    const double d = path.log_density_at(beta, z) - member.log_density(z) - offset;
    worst = std::max(worst, std::abs(d));
  }
  return worst;
}

}  // namespace qpaths
