#pragma once

#include <optional>

#include "smallball/kernels.hpp"
#include "smallball/norms.hpp"

namespace smallball {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// N samples (X_i, y_i). Row i of X is X_i, flattened column-major for matrix problems.
struct Dataset {
  RowMatrix X;
  Vector y;

  Index N() const { return X.rows(); }
  Index dim() const { return X.cols(); }
  kernels::MatrixView view() const {
    return {X.data(), static_cast<std::size_t>(X.rows()), static_cast<std::size_t>(X.cols())};
  }
  /// Throws ShapeError when N < 1, y has the wrong length, or the row
  /// dimension does not match the norm.
  void validate(const RegNorm& norm) const;
};

/// X t
Vector apply_design(const Dataset& data, const Param& t);
/// X^T r
Param apply_design_t(const Dataset& data, const Vector& r);

/// Largest eigenvalue of X^T X by power iteration (deterministic start).
double operator_norm_sq(const Dataset& data, int iterations = 50);

struct SolveConfig {
  double lambda = 0.0;
  std::optional<double> step;  // unset: N / (2 ||X||_op^2)
  double tolerance = 1e-8;
  int max_iterations = 20000;
  int power_iterations = 50;
  int kkt_check_every = 10;

  void validate() const;
};

struct SolveResult {
  Param estimate;
  double objective = 0.0;
  double kkt = 0.0;
  int iterations = 0;
  bool converged = false;
  double step = 0.0;
};

/// (1/N) ||y - X t||^2 + lambda * Psi(t)
double objective(const Dataset& data, const RegNorm& norm, double lambda, const Param& t);

/// Accelerated proximal gradient with function-value restart. On
/// non-convergence the result is flagged (converged == false) and carries the
/// best iterate seen.
SolveResult fista_solve(const Dataset& data, const RegNorm& norm, const SolveConfig& cfg);

/// Slack in the inclusion g in lambda * dPsi(t) where g = -(2/N) X^T (X t - y).
/// Zero exactly at optimal t (up to rounding).
double kkt_residual(const Dataset& data, const RegNorm& norm, double lambda, const Param& t);

/// Same certificate for a precomputed negative gradient g.
double subgradient_slack(const RegNorm& norm, double lambda, const Param& t, const Param& g);

}  // namespace smallball
