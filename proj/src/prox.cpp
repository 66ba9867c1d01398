#include "smallball/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "smallball/kernels.hpp"

namespace smallball {

Vector soft_threshold(const Vector& v, double t) {
  if (t < 0.0) throw std::domain_error("soft_threshold: threshold must be nonnegative");
  Vector out(v.size());
  kernels::soft_threshold({v.data(), static_cast<std::size_t>(v.size())}, t,
                          {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Vector prox_sorted_l1(const Vector& v, const Vector& w) {
  const Index n = v.size();
  if (w.size() != n) throw ShapeError("prox_sorted_l1: weight length differs from input length");
  for (Index i = 0; i < n; ++i) {
    if (w[i] < 0.0) throw std::invalid_argument("prox_sorted_l1: weights must be nonnegative");
    if (i > 0 && w[i] > w[i - 1]) throw std::invalid_argument("prox_sorted_l1: weights must be nonincreasing");
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::fabs(v[a]) > std::fabs(v[b]); });

  // Pool adjacent violators on |v|# - w so the result is nonincreasing.
  struct Block {
    Index start;
    Index end;  // exclusive
    double sum;
    double mean() const { return sum / static_cast<double>(end - start); }
  };
  std::vector<Block> stack;
  stack.reserve(static_cast<std::size_t>(n));
  for (Index k = 0; k < n; ++k) {
    stack.push_back({k, k + 1, std::fabs(v[order[static_cast<std::size_t>(k)]]) - w[k]});
    while (stack.size() > 1 && stack[stack.size() - 2].mean() <= stack.back().mean()) {
      const Block top = stack.back();
      stack.pop_back();
      stack.back().end = top.end;
      stack.back().sum += top.sum;
    }
  }

  Vector out = Vector::Zero(n);
  for (const Block& b : stack) {
    const double value = std::max(b.mean(), 0.0);
    if (value == 0.0) continue;
    for (Index k = b.start; k < b.end; ++k) {
      const Index i = order[static_cast<std::size_t>(k)];
      out[i] = std::copysign(value, v[i]);
    }
  }
  return out;
}

namespace {

ProxValue nuclear_impl(const RegNorm& norm, const Param& a, double t) {
  norm.check_shape(a);
  if (t < 0.0) throw std::domain_error("prox_nuclear: threshold must be nonnegative");
  if (!a.allFinite()) throw std::domain_error("prox_nuclear: SVD of a non-finite matrix");
  Eigen::JacobiSVD<Matrix> svd(as_matrix(norm, a), Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector sigma = svd.singularValues();
  for (Index i = 0; i < sigma.size(); ++i) sigma[i] = std::max(sigma[i] - t, 0.0);
  Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > 0.0) ++rank;

  ProxValue result;
  result.x = Param::Zero(a.size());
  result.psi = sigma.sum();
  if (rank > 0) {
    Eigen::Map<Matrix> out(result.x.data(), norm.rows(), norm.cols());
    out.noalias() = svd.matrixU().leftCols(rank) * sigma.head(rank).asDiagonal() *
                    svd.matrixV().leftCols(rank).transpose();
  }
  return result;
}

}  // namespace

Param prox_nuclear(const RegNorm& norm, const Param& a, double t) { return nuclear_impl(norm, a, t).x; }

ProxValue prox_with_value(const RegNorm& norm, const Param& v, double t) {
  norm.check_shape(v);
  if (t < 0.0) throw std::domain_error("prox: threshold must be nonnegative");
  switch (norm.kind()) {
    case NormKind::L1: {
      ProxValue r{soft_threshold(v, t), 0.0};
      r.psi = kernels::sum_abs({r.x.data(), static_cast<std::size_t>(r.x.size())});
      return r;
    }
    case NormKind::Slope: {
      ProxValue r{prox_sorted_l1(v, t * norm.weights()), 0.0};
      r.psi = norm_eval(norm, r.x);
      return r;
    }
    case NormKind::Trace:
      return nuclear_impl(norm, v, t);
  }
  return {};
}

Param prox(const RegNorm& norm, const Param& v, double t) { return prox_with_value(norm, v, t).x; }

}  // namespace smallball
