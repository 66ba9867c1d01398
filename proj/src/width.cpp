#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "smallball/rates.hpp"

namespace smallball {

namespace {

void check_radii(double rho, double r) {
  if (!(rho > 0.0) || !(r > 0.0) || !std::isfinite(rho) || !std::isfinite(r))
    throw std::domain_error("width: rho and r must be positive and finite");
}

double l1_isotropic(Index d, double rho, double r, double c) {
  const double dd = static_cast<double>(d);
  // k = (rho/r)^2 is the effective sparsity of the extreme points of the
  // intersection; clamping to [1, d] joins the three regimes continuously.
  const double k = std::clamp((rho / r) * (rho / r), 1.0, dd);
  return std::min(r * std::sqrt(dd), c * rho * std::sqrt(1.0 + std::log(dd / k)));
}

double slope_isotropic(const Vector& beta, double rho, double r, double c) {
  const Index d = beta.size();
  const double dd = static_cast<double>(d);
  // tail[k] = max_{i >= k} sqrt(log(ed/i)) / beta_i, with 1-based i.
  std::vector<double> tail(static_cast<std::size_t>(d) + 2, 0.0);
  for (Index i = d; i >= 1; --i) {
    const double v = std::sqrt(1.0 + std::log(dd / static_cast<double>(i))) / beta[i - 1];
    tail[static_cast<std::size_t>(i)] = std::max(tail[static_cast<std::size_t>(i) + 1], v);
  }
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 1; k <= d + 1; ++k) {
    const double km1 = static_cast<double>(k - 1);
    const double head = k == 1 ? 0.0 : r * std::sqrt(km1 * (1.0 + std::log(dd / km1)));
    best = std::min(best, c * (head + rho * tail[static_cast<std::size_t>(k)]));
  }
  return best;
}

}  // namespace

double width_closed_form(const RegNorm& norm, double rho, double r, const DesignModel& design,
                         const WidthConstants& c) {
  check_radii(rho, r);
  if (design.dim() != norm.dim()) throw ShapeError("width: design and norm dimensions differ");
  const double dd = static_cast<double>(norm.dim());

  if (design.isotropic()) {
    switch (norm.kind()) {
      case NormKind::L1:
        return l1_isotropic(norm.dim(), rho, r, c.l1);
      case NormKind::Slope:
        return slope_isotropic(norm.weights(), rho, r, c.slope);
      case NormKind::Trace: {
        const double big = static_cast<double>(std::max(norm.rows(), norm.cols()));
        return std::min(c.trace * rho * std::sqrt(big), r * std::sqrt(dd));
      }
    }
  }

  const double sigma = design.row_bound();
  switch (norm.kind()) {
    case NormKind::L1:
      return std::min(r * std::sqrt(dd), c.l1 * rho * sigma * std::sqrt(1.0 + std::log(dd)));
    case NormKind::Slope: {
      const double C = norm.weight_constant();
      return std::min((rho / C) * (3.0 * std::sqrt(6.0) * sigma / 8.0) + r * std::sqrt(M_PI / 2.0),
                      r * std::sqrt(dd));
    }
    case NormKind::Trace:
      break;
  }
  throw std::invalid_argument("width: the trace norm is only supported with an isotropic design");
}

double l1_support(const Vector& g, double rho, double r) {
  const Index d = g.size();
  std::vector<double> a(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) a[static_cast<std::size_t>(i)] = std::fabs(g[i]);
  std::sort(a.begin(), a.end(), std::greater<>());
  a.push_back(0.0);

  // f(tau) = rho tau + r ||(|g| - tau)_+||_2 is convex; on [a_{k+1}, a_k] only
  // the k largest entries are active.
  auto value = [&](double tau, Index k, double s1, double s2) {
    const double q = std::max(s2 - 2.0 * tau * s1 + static_cast<double>(k) * tau * tau, 0.0);
    return rho * tau + r * std::sqrt(q);
  };

  double best = rho * a[0];  // tau = max |g_i|
  double s1 = 0.0;
  double s2 = 0.0;
  for (Index k = 1; k <= d; ++k) {
    const double ak = a[static_cast<std::size_t>(k - 1)];
    const double lo = a[static_cast<std::size_t>(k)];
    s1 += ak;
    s2 += ak * ak;
    best = std::min(best, value(lo, k, s1, s2));
    const double kk = static_cast<double>(k);
    const double denom = r * r - rho * rho / kk;
    if (denom > 0.0) {
      const double spread = std::max(s2 - s1 * s1 / kk, 0.0);
      const double u = rho * std::sqrt(spread / denom);
      const double tau = std::clamp((s1 - u) / kk, lo, ak);
      best = std::min(best, value(tau, k, s1, s2));
    }
  }
  return best;
}

double slope_ksplit_bound(const Vector& g, const Vector& beta, double rho, double r) {
  const Vector gs = rearrange(g);
  const Index d = gs.size();
  std::vector<double> tail(static_cast<std::size_t>(d) + 1, 0.0);
  for (Index i = d - 1; i >= 0; --i)
    tail[static_cast<std::size_t>(i)] = std::max(tail[static_cast<std::size_t>(i) + 1], gs[i] / beta[i]);
  double best = rho * tail[0];
  double head2 = 0.0;
  for (Index k = 1; k <= d; ++k) {
    head2 += gs[k - 1] * gs[k - 1];
    best = std::min(best, r * std::sqrt(head2) + rho * tail[static_cast<std::size_t>(k)]);
  }
  return best;
}

namespace {

struct Welford {
  std::int64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  void add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  double se() const { return n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0; }
};

// Best value of <score, alpha w> over candidates w, each scaled by the largest
// alpha keeping Psi(alpha w) <= rho and metric(alpha w) <= r.
class CandidatePool {
 public:
  CandidatePool(double rho, double r) : rho_(rho), r_(r) {}
  void offer(double inner, double psi, double metric) {
    if (!(psi > 0.0)) return;
    double alpha = rho_ / psi;
    if (metric > 0.0) alpha = std::min(alpha, r_ / metric);
    best_ = std::max(best_, alpha * inner);
  }
  double best() const { return best_; }

 private:
  double rho_;
  double r_;
  double best_ = 0.0;
};

std::vector<Index> top_k_sizes(Index d) {
  std::vector<Index> ks;
  for (Index k = 1; k < d; k *= 2) ks.push_back(k);
  ks.push_back(d);
  return ks;
}

// Lower candidates for l1 / SLOPE: sign vectors on the top-k entries of the
// score vector, and soft-thresholded score directions at a few levels.
// `metric` maps a candidate to its L2(mu) norm.
double vector_lower(const RegNorm& norm, const Vector& score, double rho, double r,
                    const std::function<double(const Vector&)>& metric) {
  const Index d = score.size();
  std::vector<Index> order(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return std::fabs(score[a]) > std::fabs(score[b]); });

  CandidatePool pool(rho, r);
  for (Index k : top_k_sizes(d)) {
    Vector w = Vector::Zero(d);
    double inner = 0.0;
    for (Index j = 0; j < k; ++j) {
      const Index i = order[static_cast<std::size_t>(j)];
      w[i] = score[i] >= 0.0 ? 1.0 : -1.0;
      inner += std::fabs(score[i]);
    }
    pool.offer(inner, norm_eval(norm, w), metric(w));
  }
  const double top = std::fabs(score[order[0]]);
  for (double frac : {0.0, 0.25, 0.5, 0.75, 0.9}) {
    Vector w(d);
    for (Index i = 0; i < d; ++i) w[i] = std::copysign(std::max(std::fabs(score[i]) - frac * top, 0.0), score[i]);
    pool.offer(w.dot(score), norm_eval(norm, w), metric(w));
  }
  return pool.best();
}

}  // namespace

WidthEstimate width_mc(const RegNorm& norm, double rho, double r, const DesignModel& design,
                       std::int64_t trials, std::uint64_t seed) {
  check_radii(rho, r);
  if (trials < 100) throw std::invalid_argument("width_mc needs at least 100 trials");
  if (design.dim() != norm.dim()) throw ShapeError("width_mc: design and norm dimensions differ");
  if (!design.isotropic() && norm.kind() == NormKind::Trace)
    throw std::invalid_argument("width_mc: the trace norm is only supported with an isotropic design");

  const Index d = norm.dim();
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Welford lower;
  Welford upper;
  Vector g(d);

  const Matrix& root = design.covariance_sqrt();
  auto iso_metric = [](const Vector& w) { return w.norm(); };
  auto cov_metric = [&](const Vector& w) { return (root * w).norm(); };

  for (std::int64_t t = 0; t < trials; ++t) {
    for (Index i = 0; i < d; ++i) g[i] = normal(rng);
    double up = 0.0;
    double lo = 0.0;
    if (!design.isotropic()) {
      const Vector xi = root * g;
      up = std::min(r * g.norm(), rho * dual_norm_eval(norm, xi));
      lo = vector_lower(norm, xi, rho, r, cov_metric);
      // Sigma^{1/2} g itself is also a candidate direction.
      CandidatePool pool(rho, r);
      pool.offer(xi.squaredNorm(), norm_eval(norm, xi), cov_metric(xi));
      lo = std::max(lo, pool.best());
    } else if (norm.kind() == NormKind::Trace) {
      Eigen::JacobiSVD<Matrix> svd(as_matrix(norm, g), Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Vector& s = svd.singularValues();
      up = std::min(rho * s[0], r * g.norm());
      CandidatePool pool(rho, r);
      double partial = 0.0;
      for (Index k = 1; k <= s.size(); ++k) {
        partial += s[k - 1];
        // U_k V_k^T: trace norm k, Frobenius norm sqrt(k).
        pool.offer(partial, static_cast<double>(k), std::sqrt(static_cast<double>(k)));
      }
      pool.offer(g.squaredNorm(), s.sum(), g.norm());
      lo = pool.best();
    } else {
      up = norm.kind() == NormKind::L1 ? l1_support(g, rho, r) : slope_ksplit_bound(g, norm.weights(), rho, r);
      lo = vector_lower(norm, g, rho, r, iso_metric);
    }
    // Both values bound the same supremum; a feasible point can only beat the
    // upper bound through rounding.
    lo = std::min(lo, up);
    upper.add(up);
    lower.add(lo);
  }
  return {lower.mean, lower.se(), upper.mean, upper.se(), trials};
}

}  // namespace smallball
