#include "smallball/norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "smallball/kernels.hpp"

namespace smallball {

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::L1:
      return "l1";
    case NormKind::Slope:
      return "slope";
    case NormKind::Trace:
      return "trace";
  }
  return "unknown";
}

NormKind parse_norm_kind(const std::string& name) {
  if (name == "l1" || name == "lasso") return NormKind::L1;
  if (name == "slope") return NormKind::Slope;
  if (name == "trace" || name == "nuclear") return NormKind::Trace;
  throw std::invalid_argument("unknown norm '" + name + "'");
}

RegNorm RegNorm::l1(Index d) {
  if (d < 1) throw ShapeError("l1 norm needs d >= 1");
  return RegNorm(NormKind::L1, d, 1, Vector::Ones(d), 1.0);
}

RegNorm RegNorm::slope(Vector weights, double weight_constant) {
  const Index d = weights.size();
  if (d < 1) throw ShapeError("slope norm needs at least one weight");
  for (Index i = 0; i < d; ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw std::invalid_argument("slope weights must be positive and finite");
    if (i > 0 && weights[i] > weights[i - 1])
      throw std::invalid_argument("slope weights must be nonincreasing");
  }
  if (!(weight_constant > 0.0)) throw std::invalid_argument("slope weight constant must be positive");
  return RegNorm(NormKind::Slope, d, 1, std::move(weights), weight_constant);
}

RegNorm RegNorm::slope_generated(Index d, double weight_constant) {
  return slope(slope_weights(d, weight_constant), weight_constant);
}

RegNorm RegNorm::trace(Index m, Index T) {
  if (m < 1 || T < 1) throw ShapeError("trace norm needs m, T >= 1");
  return RegNorm(NormKind::Trace, m, T, Vector(), 1.0);
}

void RegNorm::check_shape(const Param& x) const {
  if (x.size() != dim()) {
    throw ShapeError("parameter has length " + std::to_string(x.size()) + ", norm expects " +
                     std::to_string(dim()));
  }
}

Vector singular_values(const RegNorm& norm, const Param& x) {
  norm.check_shape(x);
  Eigen::JacobiSVD<Matrix> svd(as_matrix(norm, x));
  return svd.singularValues();
}

Vector rearrange(const Vector& x) {
  if (x.size() == 0) throw std::invalid_argument("rearrange of an empty vector");
  std::vector<double> mags(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i) mags[static_cast<std::size_t>(i)] = std::fabs(x[i]);
  std::stable_sort(mags.begin(), mags.end(), std::greater<>());
  return Eigen::Map<Vector>(mags.data(), x.size());
}

double norm_eval(const RegNorm& norm, const Param& x) {
  norm.check_shape(x);
  switch (norm.kind()) {
    case NormKind::L1:
      return kernels::sum_abs({x.data(), static_cast<std::size_t>(x.size())});
    case NormKind::Slope:
      return norm.weights().dot(rearrange(x));
    case NormKind::Trace:
      return singular_values(norm, x).sum();
  }
  return 0.0;
}

double dual_norm_eval(const RegNorm& norm, const Param& g) {
  norm.check_shape(g);
  switch (norm.kind()) {
    case NormKind::L1:
      return g.cwiseAbs().maxCoeff();
    case NormKind::Slope: {
      const Vector sorted = rearrange(g);
      double num = 0.0;
      double den = 0.0;
      double best = 0.0;
      for (Index k = 0; k < sorted.size(); ++k) {
        num += sorted[k];
        den += norm.weights()[k];
        best = std::max(best, num / den);
      }
      return best;
    }
    case NormKind::Trace:
      return singular_values(norm, g)[0];
  }
  return 0.0;
}

Vector slope_weights(Index d, double C) {
  if (d < 1) throw std::invalid_argument("slope_weights needs d >= 1");
  if (!(C > 0.0)) throw std::invalid_argument("slope_weights needs C > 0");
  Vector beta(d);
  const double dd = static_cast<double>(d);
  for (Index i = 0; i < d; ++i) {
    // log(e d / i) written as 1 + log(d / i) so that beta_d is exactly C.
    beta[i] = C * std::sqrt(1.0 + std::log(dd / static_cast<double>(i + 1)));
  }
  return beta;
}

double calB(const Vector& beta, Index s) {
  if (s < 1 || s > beta.size()) throw std::out_of_range("calB: s must lie in [1, d]");
  double total = 0.0;
  for (Index i = 0; i < s; ++i) total += beta[i] / std::sqrt(static_cast<double>(i + 1));
  return total;
}

double error_interpolation(double e1, double e2, double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw std::domain_error("error_interpolation: p must lie in [1, 2]");
  if (e1 < 0.0 || e2 < 0.0) throw std::domain_error("error_interpolation: errors must be nonnegative");
  const double a = 2.0 / p - 1.0;
  const double b = 2.0 - 2.0 / p;
  // 0^0 = 1 keeps the endpoints exact.
  const double t1 = a == 0.0 ? 1.0 : std::pow(e1, a);
  const double t2 = b == 0.0 ? 1.0 : std::pow(e2, b);
  return t1 * t2;
}

double lp_norm(const Vector& x, double p) {
  if (!(p >= 1.0)) throw std::domain_error("lp_norm: p must be >= 1");
  if (p == 1.0) return x.cwiseAbs().sum();
  if (p == 2.0) return x.norm();
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < x.size(); ++i) acc += std::pow(std::fabs(x[i]) / scale, p);
  return scale * std::pow(acc, 1.0 / p);
}

}  // namespace smallball
