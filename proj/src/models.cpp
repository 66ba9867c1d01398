#include "smallball/models.hpp"

#include <cmath>
#include <limits>

namespace smallball {

std::string to_string(DesignKind kind) {
  switch (kind) {
    case DesignKind::IsotropicGaussian:
      return "gaussian";
    case DesignKind::Rademacher:
      return "rademacher";
    case DesignKind::CorrelatedGaussian:
      return "correlated";
  }
  return "unknown";
}

DesignKind parse_design_kind(const std::string& name) {
  if (name == "gaussian" || name == "isotropic-gaussian") return DesignKind::IsotropicGaussian;
  if (name == "rademacher") return DesignKind::Rademacher;
  if (name == "correlated" || name == "correlated-gaussian") return DesignKind::CorrelatedGaussian;
  throw std::invalid_argument("unknown design '" + name + "'");
}

DesignModel::DesignModel(DesignKind kind, Index rows, Index cols) : kind_(kind), rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw ShapeError("design dimensions must be >= 1");
}

DesignModel DesignModel::isotropic_gaussian(Index rows, Index cols) {
  DesignModel m(DesignKind::IsotropicGaussian, rows, cols);
  m.cov_ = Matrix::Identity(m.dim(), m.dim());
  m.cov_sqrt_ = m.cov_;
  return m;
}

DesignModel DesignModel::rademacher(Index rows, Index cols) {
  DesignModel m(DesignKind::Rademacher, rows, cols);
  m.cov_ = Matrix::Identity(m.dim(), m.dim());
  m.cov_sqrt_ = m.cov_;
  return m;
}

DesignModel DesignModel::correlated_gaussian(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw ShapeError("covariance must be square");
  DesignModel m(DesignKind::CorrelatedGaussian, sigma.rows(), 1);
  m.cov_ = sigma;
  m.cov_sqrt_ = psd_sqrt(sigma);
  m.row_bound_ = m.cov_sqrt_.rowwise().norm().maxCoeff();
  return m;
}

double DesignModel::metric_norm(const Param& x) const {
  if (x.size() != dim()) throw ShapeError("metric_norm: dimension mismatch");
  if (isotropic()) return x.norm();
  return (cov_sqrt_ * x).norm();
}

RowMatrix DesignModel::sample(Index N, Rng& rng) const {
  if (N < 1) throw std::invalid_argument("sample size must be >= 1");
  const Index d = dim();
  RowMatrix X(N, d);
  if (kind_ == DesignKind::Rademacher) {
    std::bernoulli_distribution coin(0.5);
    for (Index i = 0; i < N; ++i)
      for (Index j = 0; j < d; ++j) X(i, j) = coin(rng) ? 1.0 : -1.0;
    return X;
  }
  std::normal_distribution<double> normal;
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < d; ++j) X(i, j) = normal(rng);
  if (kind_ == DesignKind::CorrelatedGaussian) {
    // Rows g^T Sigma^{1/2} have covariance Sigma because the root is symmetric.
    X = (X * cov_sqrt_).eval();
  }
  return X;
}

Matrix toeplitz_covariance(Index d, double a) {
  if (d < 1) throw ShapeError("toeplitz_covariance needs d >= 1");
  if (!(std::fabs(a) < 1.0)) throw std::invalid_argument("toeplitz_covariance needs |a| < 1");
  Matrix s(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) s(i, j) = std::pow(a, static_cast<double>(std::abs(i - j)));
  return s;
}

Matrix psd_sqrt(const Matrix& sigma) {
  if (sigma.rows() != sigma.cols()) throw ShapeError("psd_sqrt: matrix must be square");
  if (!sigma.allFinite()) throw std::invalid_argument("covariance has non-finite entries");
  const double scale = std::max(sigma.cwiseAbs().maxCoeff(), 1e-300);
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  Vector ev = eig.eigenvalues();
  if (ev.minCoeff() < -1e-10 * scale) throw std::invalid_argument("covariance must be positive semidefinite");
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
}

std::string to_string(NoiseKind kind) { return kind == NoiseKind::Gaussian ? "gaussian" : "student-t"; }

NoiseKind parse_noise_kind(const std::string& name) {
  if (name == "gaussian") return NoiseKind::Gaussian;
  if (name == "student-t" || name == "student" || name == "t") return NoiseKind::StudentT;
  throw std::invalid_argument("unknown noise '" + name + "'");
}

NoiseModel NoiseModel::gaussian(double scale, double q) {
  NoiseModel n{NoiseKind::Gaussian, scale, 3.0, q};
  n.validate();
  return n;
}

NoiseModel NoiseModel::student_t(double scale, double dof, double q) {
  NoiseModel n{NoiseKind::StudentT, scale, dof, q};
  n.validate();
  return n;
}

void NoiseModel::validate() const {
  if (!(scale >= 0.0) || !std::isfinite(scale)) throw std::invalid_argument("noise scale must be finite and >= 0");
  if (!(q > 2.0)) throw std::invalid_argument("noise exponent q must exceed 2");
  if (kind == NoiseKind::StudentT && !(dof > q))
    throw std::invalid_argument("student-t noise needs dof > q for a finite L_q norm");
}

namespace {

// E|Z|^q for Z standard normal.
double gaussian_abs_moment(double q) {
  return std::exp(0.5 * q * std::log(2.0) + std::lgamma(0.5 * (q + 1.0)) - 0.5 * std::log(M_PI));
}

// E|T|^q for T Student-t with nu degrees of freedom, q < nu.
double student_abs_moment(double q, double nu) {
  return std::exp(0.5 * q * std::log(nu) + std::lgamma(0.5 * (q + 1.0)) + std::lgamma(0.5 * (nu - q)) -
                  0.5 * std::log(M_PI) - std::lgamma(0.5 * nu));
}

}  // namespace

double NoiseModel::lq_norm() const {
  validate();
  const double m = kind == NoiseKind::Gaussian ? gaussian_abs_moment(q) : student_abs_moment(q, dof);
  return scale * std::pow(m, 1.0 / q);
}

double NoiseModel::l2_norm() const {
  if (kind == NoiseKind::Gaussian) return scale;
  if (dof <= 2.0) return std::numeric_limits<double>::infinity();
  return scale * std::sqrt(dof / (dof - 2.0));
}

double NoiseModel::sample(Rng& rng) const {
  if (kind == NoiseKind::Gaussian) return scale * std::normal_distribution<double>()(rng);
  return scale * std::student_t_distribution<double>(dof)(rng);
}

}  // namespace smallball
