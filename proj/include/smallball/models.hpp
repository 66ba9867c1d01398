#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "smallball/norms.hpp"
#include "smallball/solver.hpp"

namespace smallball {

using Rng = std::mt19937_64;

enum class DesignKind { IsotropicGaussian, Rademacher, CorrelatedGaussian };

std::string to_string(DesignKind kind);
DesignKind parse_design_kind(const std::string& name);

/// Distribution of the rows X_i.
class DesignModel {
 public:
  static DesignModel isotropic_gaussian(Index rows, Index cols = 1);
  static DesignModel rademacher(Index rows, Index cols = 1);
  /// Gaussian with covariance sigma (symmetric positive semidefinite, vectors only).
  static DesignModel correlated_gaussian(const Matrix& sigma);

  DesignKind kind() const { return kind_; }
  bool isotropic() const { return kind_ != DesignKind::CorrelatedGaussian; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index dim() const { return rows_ * cols_; }
  /// Identity for the isotropic kinds.
  const Matrix& covariance() const { return cov_; }
  const Matrix& covariance_sqrt() const { return cov_sqrt_; }
  /// max_j ||Sigma^{1/2}_{j.}||_2 (1 for isotropic designs).
  double row_bound() const { return row_bound_; }
  double subgaussian_constant() const { return L_; }

  /// ||Sigma^{1/2} x||_2, the L2(mu) norm of <x, .>.
  double metric_norm(const Param& x) const;

  /// Draw N rows.
  RowMatrix sample(Index N, Rng& rng) const;

 private:
  DesignModel(DesignKind kind, Index rows, Index cols);

  DesignKind kind_;
  Index rows_;
  Index cols_;
  Matrix cov_;
  Matrix cov_sqrt_;
  double row_bound_ = 1.0;
  double L_ = 1.0;
};

/// Sigma_ij = a^|i-j|.
Matrix toeplitz_covariance(Index d, double a);

/// Symmetric PSD square root; throws if sigma is not symmetric PSD.
Matrix psd_sqrt(const Matrix& sigma);

enum class NoiseKind { Gaussian, StudentT };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& name);

/// Additive noise xi. `q` is the integrability exponent used in the rate
/// formulas; for Student-t it must stay below the degrees of freedom.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Gaussian;
  double scale = 1.0;
  double dof = 3.0;  // Student-t only
  double q = 2.5;

  static NoiseModel gaussian(double scale, double q = 2.5);
  static NoiseModel student_t(double scale, double dof = 3.0, double q = 2.5);

  void validate() const;
  /// ||xi||_{L_q}, closed form.
  double lq_norm() const;
  /// ||xi||_{L_2}; infinite for Student-t with dof <= 2.
  double l2_norm() const;
  double sample(Rng& rng) const;
};

}  // namespace smallball
