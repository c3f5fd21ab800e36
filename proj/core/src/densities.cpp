#include "qpaths/densities.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "qpaths/errors.hpp"

namespace qpaths {

namespace {

constexpr double kSymmetryTolerance = 1e-12;

// Everything a Gaussian or Student-t evaluator needs, precomputed once.
struct QuadraticForm {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;  // inverse of the variance / scale matrix
  Eigen::MatrixXd chol;       // lower Cholesky factor of the variance / scale matrix
  double log_det = 0.0;

  [[nodiscard]] int dim() const { return static_cast<int>(mean.size()); }

  // (z - mean)^T precision (z - mean), without temporaries.
  [[nodiscard]] double mahalanobis(const Point& z) const {
    const int d = dim();
    double acc = 0.0;
    for (int i = 0; i < d; ++i) {
      const double di = z[i] - mean[i];
      double row = 0.0;
      for (int j = 0; j < d; ++j) {
        row += precision(i, j) * (z[j] - mean[j]);
      }
      acc += di * row;
    }
    return acc;
  }

  // out = -factor * precision (z - mean)
  void scaled_gradient(const Point& z, double factor, Point& out) const {
    const int d = dim();
    for (int i = 0; i < d; ++i) {
      double row = 0.0;
      for (int j = 0; j < d; ++j) {
        row += precision(i, j) * (z[j] - mean[j]);
      }
      out[i] = -factor * row;
    }
  }
};

std::shared_ptr<const QuadraticForm> build_form(const Eigen::VectorXd& mean,
                                                const MatrixSpec& matrix, const char* what) {
  const auto d = mean.size();
  if (d < 1) {
    throw ConstructionError(std::string(what) + ": mean must have at least one component");
  }
  if (!mean.allFinite()) {
    throw ConstructionError(std::string(what) + ": mean must be finite");
  }
  const Eigen::MatrixXd dense = to_dense(matrix);
  if (dense.rows() != d || dense.cols() != d) {
    throw ConstructionError(std::string(what) + ": matrix shape does not match mean dimension");
  }
  if (!dense.allFinite()) {
    throw ConstructionError(std::string(what) + ": matrix must be finite");
  }
  const double scale = dense.cwiseAbs().maxCoeff();
  if ((dense - dense.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * std::max(1.0, scale)) {
    throw ConstructionError(std::string(what) + ": matrix must be symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(dense);
  if (llt.info() != Eigen::Success || (llt.matrixL().toDenseMatrix().diagonal().array() <= 0.0).any()) {
    throw ConstructionError(std::string(what) + ": matrix must be positive definite");
  }
  auto form = std::make_shared<QuadraticForm>();
  form->mean = mean;
  form->chol = llt.matrixL();
  form->precision = llt.solve(Eigen::MatrixXd::Identity(d, d));
  form->precision = 0.5 * (form->precision + form->precision.transpose()).eval();
  form->log_det = 2.0 * form->chol.diagonal().array().log().sum();
  return form;
}

Point standard_normal(int d, RngStream& rng) {
  Point eps(d);
  for (int i = 0; i < d; ++i) {
    eps[i] = rng.normal();
  }
  return eps;
}

}  // namespace

DensityHandle::DensityHandle(int dim, LogDensityFn log_density, GradLogDensityFn grad,
                             SamplerFn sampler, std::optional<double> log_normalizer,
                             std::string description)
    : dim_(dim),
      log_density_(std::move(log_density)),
      grad_(std::move(grad)),
      sampler_(std::move(sampler)),
      log_normalizer_(log_normalizer),
      description_(std::move(description)) {
  if (dim_ < 1) {
    throw ConstructionError("density handle: dim must be positive");
  }
  if (!log_density_) {
    throw ConstructionError("density handle: log-density callable is required");
  }
  if (log_normalizer_ && !std::isfinite(*log_normalizer_)) {
    throw ConstructionError("density handle: log normalizer must be finite");
  }
}

void DensityHandle::check_point(const Point& z) const {
  if (z.size() != dim_) {
    throw PreconditionError("density handle: point has dimension " + std::to_string(z.size()) +
                            ", expected " + std::to_string(dim_));
  }
}

double DensityHandle::log_density(const Point& z) const {
  check_point(z);
  return log_density_(z);
}

void DensityHandle::grad_log_density(const Point& z, Point& out) const {
  check_point(z);
  out.resize(dim_);
  if (grad_) {
    grad_(z, out);
    return;
  }
  Point probe = z;
  for (int i = 0; i < dim_; ++i) {
    const double h = 1e-5 * (1.0 + std::abs(z[i]));
    probe[i] = z[i] + h;
    const double up = log_density_(probe);
    probe[i] = z[i] - h;
    const double down = log_density_(probe);
    probe[i] = z[i];
    out[i] = (up - down) / (2.0 * h);
  }
}

Point DensityHandle::grad_log_density(const Point& z) const {
  Point out(dim_);
  grad_log_density(z, out);
  return out;
}

Point DensityHandle::sample(RngStream& rng) const {
  if (!sampler_) {
    throw CapabilityError("density handle '" + description_ + "' has no exact sampler");
  }
  return sampler_(rng);
}

DensityHandle DensityHandle::scaled(double log_c) const {
  if (!std::isfinite(log_c)) {
    throw PreconditionError("scaled: log constant must be finite");
  }
  auto inner = log_density_;
  std::optional<double> normalizer;
  if (log_normalizer_) {
    normalizer = *log_normalizer_ + log_c;
  }
  return DensityHandle(
      dim_, [inner, log_c](const Point& z) { return inner(z) + log_c; }, grad_, sampler_,
      normalizer, description_ + " * exp(" + std::to_string(log_c) + ")");
}

Eigen::MatrixXd to_dense(const MatrixSpec& m) {
  if (const auto* diag = std::get_if<Eigen::VectorXd>(&m)) {
    return diag->asDiagonal();
  }
  return std::get<Eigen::MatrixXd>(m);
}

GaussianSpec GaussianSpec::univariate(double mean, double variance) {
  return {Eigen::VectorXd(Eigen::VectorXd::Constant(1, mean)), MatrixSpec(Eigen::VectorXd(Eigen::VectorXd::Constant(1, variance)))};
}

StudentTSpec StudentTSpec::univariate(double mean, double scale, double dof) {
  return {Eigen::VectorXd(Eigen::VectorXd::Constant(1, mean)), MatrixSpec(Eigen::VectorXd(Eigen::VectorXd::Constant(1, scale))), dof};
}

DensityHandle make_gaussian(const GaussianSpec& spec) {
  auto form = build_form(spec.mean, spec.variance, "gaussian");
  const int d = form->dim();
  const double log_norm = -0.5 * (d * std::log(2.0 * std::numbers::pi) + form->log_det);

  std::ostringstream desc;
  desc << "gaussian(d=" << d << ")";
  return DensityHandle(
      d,
      [form, log_norm](const Point& z) { return log_norm - 0.5 * form->mahalanobis(z); },
      [form](const Point& z, Point& out) { form->scaled_gradient(z, 1.0, out); },
      [form](RngStream& rng) -> Point {
        return form->mean + form->chol * standard_normal(form->dim(), rng);
      },
      0.0, desc.str());
}

DensityHandle make_student_t(const StudentTSpec& spec) {
  if (!std::isfinite(spec.dof) || spec.dof <= 0.0) {
    throw ConstructionError("student_t: dof must be positive and finite");
  }
  auto form = build_form(spec.mean, spec.scale, "student_t");
  const int d = form->dim();
  const double nu = spec.dof;
  const double log_norm = std::lgamma(0.5 * (nu + d)) - std::lgamma(0.5 * nu) -
                          0.5 * d * std::log(nu * std::numbers::pi) - 0.5 * form->log_det;
  const double power = 0.5 * (nu + d);

  std::ostringstream desc;
  desc << "student_t(d=" << d << ", nu=" << nu << ")";
  return DensityHandle(
      d,
      [form, log_norm, power, nu](const Point& z) {
        return log_norm - power * std::log1p(form->mahalanobis(z) / nu);
      },
      [form, nu, d](const Point& z, Point& out) {
        const double m = form->mahalanobis(z);
        form->scaled_gradient(z, (nu + d) / (nu + m), out);
      },
      [form, nu](RngStream& rng) -> Point {
        std::chi_squared_distribution<double> chi2(nu);
        const Point eps = standard_normal(form->dim(), rng);
        const double w = std::sqrt(nu / chi2(rng));
        return form->mean + w * (form->chol * eps);
      },
      0.0, desc.str());
}

DensityHandle make_density(const DensitySpec& spec) {
  return std::visit(
      [](const auto& s) -> DensityHandle {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, GaussianSpec>) {
          return make_gaussian(s);
        } else {
          return make_student_t(s);
        }
      },
      spec);
}

int spec_dim(const DensitySpec& spec) {
  return std::visit([](const auto& s) { return static_cast<int>(s.mean.size()); }, spec);
}

double q_from_nu(double nu, int dim) {
  if (std::isnan(nu) || nu <= 0.0) {
    throw DomainError("q_from_nu: nu must be positive");
  }
  if (dim < 1) {
    throw DomainError("q_from_nu: dim must be positive");
  }
  return (nu + dim + 2.0) / (nu + dim);
}

double nu_from_q(double q, int dim) {
  if (dim < 1) {
    throw DomainError("nu_from_q: dim must be positive");
  }
  const double upper = 1.0 + 2.0 / dim;
  if (!(q > 1.0 && q < upper)) {
    throw DomainError("nu_from_q: q must lie in (1, " + std::to_string(upper) +
                      ") for a positive nu");
  }
  return (dim - dim * q + 2.0) / (q - 1.0);
}

}  // namespace qpaths
