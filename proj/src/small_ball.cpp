#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "smallball/rates.hpp"

namespace smallball {

namespace {

constexpr Index kBatch = 1024;

void check_args(double kappa, std::int64_t samples) {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::domain_error("small-ball kappa must lie in (0, 1]");
  if (samples < 1000) throw std::invalid_argument("small-ball estimate needs at least 1000 samples");
}

// Column j of `dirs` is a direction; returns the per-direction hit frequency.
Vector hit_frequencies(const DesignModel& design, const Matrix& dirs, double kappa, std::int64_t samples,
                       Rng& rng) {
  const Index k = dirs.cols();
  Vector thresholds(k);
  for (Index j = 0; j < k; ++j) thresholds[j] = kappa * design.metric_norm(dirs.col(j));
  Eigen::VectorXd hits = Eigen::VectorXd::Zero(k);
  std::int64_t done = 0;
  while (done < samples) {
    const Index n = static_cast<Index>(std::min<std::int64_t>(kBatch, samples - done));
    const RowMatrix X = design.sample(n, rng);
    const Matrix proj = X * dirs;
    for (Index j = 0; j < k; ++j)
      for (Index i = 0; i < n; ++i)
        if (std::fabs(proj(i, j)) >= thresholds[j]) hits[j] += 1.0;
    done += n;
  }
  return hits / static_cast<double>(samples);
}

}  // namespace

double small_ball_probability(const DesignModel& design, const Param& direction, double kappa,
                              std::int64_t samples, std::uint64_t seed) {
  check_args(kappa, samples);
  if (direction.size() != design.dim()) throw ShapeError("small_ball_probability: dimension mismatch");
  if (design.metric_norm(direction) == 0.0) throw std::domain_error("small_ball_probability: degenerate direction");
  Rng rng(seed);
  Matrix dirs = direction;
  return hit_frequencies(design, dirs, kappa, samples, rng)[0];
}

SmallBallEstimate small_ball_estimate(const DesignModel& design, double kappa, std::int64_t samples,
                                      std::uint64_t seed, int directions) {
  check_args(kappa, samples);
  if (directions < 1) throw std::invalid_argument("small_ball_estimate needs at least one direction");
  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix dirs(design.dim(), directions);
  for (Index j = 0; j < dirs.cols(); ++j) {
    do {
      for (Index i = 0; i < dirs.rows(); ++i) dirs(i, j) = normal(rng);
    } while (design.metric_norm(dirs.col(j)) == 0.0);
    dirs.col(j).normalize();
  }
  const Vector freq = hit_frequencies(design, dirs, kappa, samples, rng);
  SmallBallEstimate est;
  est.kappa = kappa;
  est.epsilon = freq.minCoeff();
  est.theta = kappa * kappa * est.epsilon / 16.0;
  est.samples = samples;
  return est;
}

const SmallBallEstimate& default_small_ball(const DesignModel& design) {
  using Key = std::tuple<int, Index, Index, double, double>;
  static std::mutex mutex;
  static std::map<Key, SmallBallEstimate> cache;
  const Matrix& cov = design.covariance();
  const Key key{static_cast<int>(design.kind()), design.rows(), design.cols(), cov.sum(), cov.squaredNorm()};
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, small_ball_estimate(design, 0.5, 100000, 0x5b411ULL)).first;
  return it->second;
}

}  // namespace smallball
