#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace smallball {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Parameter vector. Matrix-valued parameters (m x T) are stored flattened in
/// column-major order, so an m x T parameter has length m * T.
using Param = Eigen::VectorXd;

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class NormKind { L1, Slope, Trace };

std::string to_string(NormKind kind);
NormKind parse_norm_kind(const std::string& name);

/// The regularizer: l1, sorted-l1 (SLOPE) with weights beta, or trace norm.
class RegNorm {
 public:
  static RegNorm l1(Index d);
  /// Weights must be positive and nonincreasing.
  static RegNorm slope(Vector weights, double weight_constant = 1.0);
  /// SLOPE with beta_i = C * sqrt(log(e d / i)).
  static RegNorm slope_generated(Index d, double weight_constant);
  static RegNorm trace(Index m, Index T);

  NormKind kind() const { return kind_; }
  bool is_matrix() const { return kind_ == NormKind::Trace; }
  /// Length of a flattened parameter.
  Index dim() const { return rows_ * cols_; }
  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  /// SLOPE weights; all ones for l1; empty for trace.
  const Vector& weights() const { return weights_; }
  double weight_constant() const { return weight_constant_; }

  void check_shape(const Param& x) const;

  friend bool operator==(const RegNorm&, const RegNorm&) = default;

 private:
  RegNorm(NormKind kind, Index rows, Index cols, Vector weights, double c)
      : kind_(kind), rows_(rows), cols_(cols), weights_(std::move(weights)), weight_constant_(c) {}

  NormKind kind_;
  Index rows_;
  Index cols_;
  Vector weights_;
  double weight_constant_;
};

/// View a flattened parameter as the m x T matrix it encodes.
inline Eigen::Map<const Matrix> as_matrix(const RegNorm& norm, const Param& x) {
  return {x.data(), norm.rows(), norm.cols()};
}

/// Singular values of a flattened matrix parameter, nonincreasing.
Vector singular_values(const RegNorm& norm, const Param& x);

/// |x| sorted nonincreasing (stable in the original index order).
Vector rearrange(const Vector& x);

double norm_eval(const RegNorm& norm, const Param& x);

/// Dual norm. For SLOPE: max_k (sum_{i<=k} g#_i) / (sum_{i<=k} beta_i).
double dual_norm_eval(const RegNorm& norm, const Param& g);

/// beta_i = C * sqrt(log(e d / i)), i = 1..d.
Vector slope_weights(Index d, double C);

/// B_s = sum_{i<=s} beta_i / sqrt(i).
double calB(const Vector& beta, Index s);

/// e1^(2/p - 1) * e2^(2 - 2/p): the l_p bound obtained from the l_1 and l_2 errors.
double error_interpolation(double e1, double e2, double p);

/// l_p norm of a vector, p >= 1.
double lp_norm(const Vector& x, double p);

}  // namespace smallball
