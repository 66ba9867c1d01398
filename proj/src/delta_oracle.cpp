#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "smallball/sparsity.hpp"

namespace smallball {

namespace {

constexpr Index kMaxOracleDim = 6;

// A point f near t*, reduced to what determines sup_{z in dPsi(f)} <z, w>:
// its sign pattern and the clusters of equal |f_i| in decreasing order.
struct NormingPoint {
  std::vector<double> sign;                // 0 on the zero cluster
  std::vector<std::vector<Index>> clusters;  // nonzero clusters, largest magnitude first
  std::vector<Index> zeros;
  std::vector<Index> offsets;              // weight position where each cluster starts
  Index zero_offset = 0;
};

NormingPoint structure_of(const Vector& f) {
  const Index d = f.size();
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return std::fabs(f[a]) > std::fabs(f[b]); });
  NormingPoint p;
  p.sign.assign(static_cast<std::size_t>(d), 0.0);
  Index k = 0;
  while (k < d) {
    const double mag = std::fabs(f[order[static_cast<std::size_t>(k)]]);
    Index e = k + 1;
    while (e < d && std::fabs(f[order[static_cast<std::size_t>(e)]]) == mag) ++e;
    std::vector<Index> members(order.begin() + k, order.begin() + e);
    std::sort(members.begin(), members.end());
    if (mag == 0.0) {
      p.zeros = members;
      p.zero_offset = k;
    } else {
      for (Index i : members) p.sign[static_cast<std::size_t>(i)] = f[i] > 0.0 ? 1.0 : -1.0;
      p.clusters.push_back(members);
      p.offsets.push_back(k);
    }
    k = e;
  }
  return p;
}

// sup over the subdifferential of the sorted-l1 norm at a point with structure p.
double norming_sup(const NormingPoint& p, const Vector& beta, const Vector& w, std::vector<double>& buf) {
  double total = 0.0;
  for (std::size_t c = 0; c < p.clusters.size(); ++c) {
    buf.clear();
    for (Index i : p.clusters[c]) buf.push_back(p.sign[static_cast<std::size_t>(i)] * w[i]);
    std::sort(buf.begin(), buf.end(), std::greater<>());
    for (std::size_t j = 0; j < buf.size(); ++j) total += buf[j] * beta[p.offsets[c] + static_cast<Index>(j)];
  }
  buf.clear();
  for (Index i : p.zeros) buf.push_back(std::fabs(w[i]));
  std::sort(buf.begin(), buf.end(), std::greater<>());
  for (std::size_t j = 0; j < buf.size(); ++j) total += buf[j] * beta[p.zero_offset + static_cast<Index>(j)];
  return total;
}

// Exact extreme points of Gamma for l1: z in {-1, 1}^d is norming for some f in
// the rho/20 ball iff the coordinates where z disagrees with sign(t*) can be
// zeroed within the budget.
std::vector<Vector> l1_gamma(const Vector& t_star, double budget) {
  const Index d = t_star.size();
  std::vector<Vector> out;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    Vector z(d);
    double cost = 0.0;
    for (Index i = 0; i < d; ++i) {
      z[i] = (mask >> i) & 1u ? 1.0 : -1.0;
      if (z[i] * t_star[i] < 0.0) cost += std::fabs(t_star[i]);
    }
    if (cost <= budget) out.push_back(z);
  }
  return out;
}

// Candidate points for SLOPE: zero a subset, then merge contiguous runs of the
// remaining sorted magnitudes to their mean; keep those within the budget.
std::vector<NormingPoint> slope_gamma(const RegNorm& norm, const Vector& t_star, double budget) {
  const Index d = t_star.size();
  std::vector<NormingPoint> out;
  std::set<std::vector<double>> seen;
  for (unsigned zero_mask = 0; zero_mask < (1u << d); ++zero_mask) {
    Vector base = t_star;
    for (Index i = 0; i < d; ++i)
      if ((zero_mask >> i) & 1u) base[i] = 0.0;
    std::vector<Index> live;
    for (Index i = 0; i < d; ++i)
      if (base[i] != 0.0) live.push_back(i);
    std::stable_sort(live.begin(), live.end(), [&](Index a, Index b) { return std::fabs(base[a]) > std::fabs(base[b]); });
    const Index m = static_cast<Index>(live.size());
    const unsigned cuts = m > 1 ? (1u << (m - 1)) : 1u;
    for (unsigned merge = 0; merge < cuts; ++merge) {
      Vector f = base;
      Index start = 0;
      for (Index j = 1; j <= m; ++j) {
        const bool boundary = j == m || !((merge >> (j - 1)) & 1u);
        if (!boundary) continue;
        double mean = 0.0;
        for (Index q = start; q < j; ++q) mean += std::fabs(base[live[static_cast<std::size_t>(q)]]);
        mean /= static_cast<double>(j - start);
        for (Index q = start; q < j; ++q) {
          const Index i = live[static_cast<std::size_t>(q)];
          f[i] = std::copysign(mean, base[i]);
        }
        start = j;
      }
      if (norm_eval(norm, Vector(t_star - f)) > budget) continue;
      const NormingPoint p = structure_of(f);
      // Key on the structure, which is all the sup depends on.
      std::vector<double> key = p.sign;
      for (const auto& c : p.clusters) {
        key.push_back(-1.0);
        for (Index i : c) key.push_back(static_cast<double>(i));
      }
      if (seen.insert(key).second) out.push_back(p);
    }
  }
  return out;
}

}  // namespace

DeltaOracleResult delta_oracle(const RegNorm& norm, const Vector& t_star, double rho, double r,
                               std::int64_t samples, std::uint64_t seed) {
  if (norm.kind() == NormKind::Trace) throw std::invalid_argument("delta_oracle supports l1 and SLOPE only");
  const Index d = norm.dim();
  if (d > kMaxOracleDim) throw std::invalid_argument("delta_oracle needs d <= 6");
  norm.check_shape(t_star);
  if (!(rho > 0.0) || !(r > 0.0)) throw std::domain_error("delta_oracle needs rho, r > 0");
  if (samples < 1) throw std::invalid_argument("delta_oracle needs samples >= 1");

  const Vector& beta = norm.weights();
  DeltaOracleResult res;
  // The closest point to 0 on {Psi = rho} has norm rho / ||beta||_2.
  if (rho / beta.norm() > r) {
    res.delta = rho;
    res.h_empty = true;
    return res;
  }

  const double budget = rho / 20.0;
  std::vector<Vector> z_list;
  std::vector<NormingPoint> points;
  if (norm.kind() == NormKind::L1) {
    z_list = l1_gamma(t_star, budget);
    res.gamma_size = static_cast<std::int64_t>(z_list.size());
  } else {
    points = slope_gamma(norm, t_star, budget);
    res.gamma_size = static_cast<std::int64_t>(points.size());
  }

  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(d));
  auto sup_gamma = [&](const Vector& w) {
    double best = -std::numeric_limits<double>::infinity();
    if (norm.kind() == NormKind::L1) {
      for (const Vector& z : z_list) best = std::max(best, z.dot(w));
    } else {
      for (const NormingPoint& p : points) best = std::max(best, norming_sup(p, beta, w, buf));
    }
    return best;
  };

  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<Index> keep_dist(1, d);
  std::vector<Index> order(static_cast<std::size_t>(d));
  const double beta_sq = beta.squaredNorm();
  double inf = std::numeric_limits<double>::infinity();

  for (std::int64_t k = 0; k < samples; ++k) {
    Vector w(d);
    for (Index i = 0; i < d; ++i) w[i] = normal(rng);
    if (k % 2 == 1) {
      const Index keep = keep_dist(rng);
      std::iota(order.begin(), order.end(), Index{0});
      std::shuffle(order.begin(), order.end(), rng);
      for (Index j = keep; j < d; ++j) w[order[static_cast<std::size_t>(j)]] = 0.0;
    }
    const double psi = norm_eval(norm, w);
    if (!(psi > 0.0)) continue;
    w *= rho / psi;

    if (w.norm() > r) {
      // Psi is linear on the cell of w (fixed signs and ordering), so the
      // segment to the cell's minimum-norm point c stays on {Psi = rho}.
      std::iota(order.begin(), order.end(), Index{0});
      std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return std::fabs(w[a]) > std::fabs(w[b]); });
      Vector c(d);
      for (Index j = 0; j < d; ++j) {
        const Index i = order[static_cast<std::size_t>(j)];
        c[i] = (w[i] >= 0.0 ? 1.0 : -1.0) * rho * beta[j] / beta_sq;
      }
      // Solve ||c + t (w - c)||^2 = r^2 for t in [0, 1].
      const Vector dir = w - c;
      const double a = dir.squaredNorm();
      const double b = 2.0 * c.dot(dir);
      const double cc = c.squaredNorm() - r * r;
      const double disc = std::max(b * b - 4.0 * a * cc, 0.0);
      const double t = std::clamp((-b + std::sqrt(disc)) / (2.0 * a), 0.0, 1.0);
      w = c + t * dir;
    }
    ++res.h_samples;
    inf = std::min(inf, sup_gamma(w));
  }
  res.delta = res.h_samples > 0 ? inf : rho;
  return res;
}

}  // namespace smallball
