#include <gtest/gtest.h>

#include <random>

#include "smallball/models.hpp"
#include "smallball/prox.hpp"
#include "smallball/solver.hpp"
#include "test_util.hpp"

using namespace smallball;
using smallball::test::gaussian_vector;

namespace {

Dataset identity_data(const Vector& y) {
  Dataset data;
  data.X = RowMatrix::Identity(y.size(), y.size());
  data.y = y;
  return data;
}

Dataset gaussian_data(std::mt19937_64& rng, Index N, Index d, const Param& t, double noise) {
  Dataset data;
  data.X.resize(N, d);
  std::normal_distribution<double> nd;
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < d; ++j) data.X(i, j) = nd(rng);
  data.y = data.X * t;
  for (Index i = 0; i < N; ++i) data.y[i] -= noise * nd(rng);
  return data;
}

SolveConfig tight(double lambda) {
  SolveConfig c;
  c.lambda = lambda;
  c.tolerance = 1e-12;
  c.max_iterations = 100000;
  return c;
}

}  // namespace

TEST(Fista, UnregularizedOrthonormalDesignReturnsY) {
  std::mt19937_64 rng(31);
  const Vector y = gaussian_vector(rng, 10);
  const SolveResult res = fista_solve(identity_data(y), RegNorm::l1(10), tight(0.0));
  EXPECT_TRUE(res.converged);
  EXPECT_LE((res.estimate - y).norm(), 1e-8);
}

TEST(Fista, IdentityDesignGivesSeparableSoftThreshold) {
  std::mt19937_64 rng(32);
  const Index d = 12;
  const Vector y = gaussian_vector(rng, d, 2.0);
  const double lambda = 0.15;
  const SolveResult res = fista_solve(identity_data(y), RegNorm::l1(d), tight(lambda));
  // (1/d)(y_i - t_i)^2 + lambda |t_i| is minimized by soft thresholding at lambda d / 2.
  const Vector expect = soft_threshold(y, lambda * d / 2.0);
  EXPECT_LE((res.estimate - expect).norm(), 1e-8);
  EXPECT_LE(kkt_residual(identity_data(y), RegNorm::l1(d), lambda, expect), 1e-8);
}

TEST(Fista, LambdaAboveDualThresholdGivesZero) {
  std::mt19937_64 rng(33);
  const std::vector<RegNorm> norms = {RegNorm::l1(20), RegNorm::slope_generated(20, 1.0), RegNorm::trace(5, 4)};
  for (const auto& n : norms) {
    const Param t = gaussian_vector(rng, n.dim());
    const Dataset data = gaussian_data(rng, 40, n.dim(), t, 0.5);
    const double thresh = dual_norm_eval(n, (2.0 / 40) * apply_design_t(data, data.y));
    const SolveResult res = fista_solve(data, n, tight(thresh * 1.001));
    EXPECT_LE(res.estimate.norm(), 1e-10) << to_string(n.kind());
    EXPECT_EQ(kkt_residual(data, n, thresh * 1.001, Param::Zero(n.dim())), 0.0);
    EXPECT_GT(kkt_residual(data, n, thresh * 0.9, Param::Zero(n.dim())), 0.0);
  }
}

TEST(Fista, KktResidualDetectsNonOptimalPoints) {
  std::mt19937_64 rng(34);
  const RegNorm n = RegNorm::slope_generated(15, 1.0);
  const Param t = gaussian_vector(rng, 15);
  const Dataset data = gaussian_data(rng, 60, 15, t, 0.3);
  const SolveResult res = fista_solve(data, n, tight(0.05));
  EXPECT_LE(res.kkt, 1e-7);
  for (int k = 0; k < 20; ++k) EXPECT_GT(kkt_residual(data, n, 0.05, gaussian_vector(rng, 15)), 1e-3);
}

TEST(Fista, AllNormsReachSmallKkt) {
  std::mt19937_64 rng(35);
  const std::vector<RegNorm> norms = {RegNorm::l1(30), RegNorm::slope_generated(30, 1.0), RegNorm::trace(6, 5)};
  for (const auto& n : norms) {
    const Param t = gaussian_vector(rng, n.dim());
    const Dataset data = gaussian_data(rng, 80, n.dim(), t, 0.5);
    const SolveResult res = fista_solve(data, n, tight(0.1));
    EXPECT_TRUE(res.converged) << to_string(n.kind());
    EXPECT_LE(kkt_residual(data, n, 0.1, res.estimate), 1e-6) << to_string(n.kind());
    EXPECT_NEAR(res.objective, objective(data, n, 0.1, res.estimate), 1e-12);
  }
}

TEST(Fista, NeverWorseThanTruthOnNoiselessData) {
  std::mt19937_64 rng(36);
  const std::vector<RegNorm> norms = {RegNorm::l1(25), RegNorm::slope_generated(25, 1.0), RegNorm::trace(5, 5)};
  for (const auto& n : norms) {
    for (int rep = 0; rep < 5; ++rep) {
      const Param t = gaussian_vector(rng, n.dim());
      const Dataset data = gaussian_data(rng, 50, n.dim(), t, 0.0);
      SolveConfig cfg;
      cfg.lambda = 0.05;
      const SolveResult res = fista_solve(data, n, cfg);
      EXPECT_LE(res.objective, objective(data, n, 0.05, t) + cfg.tolerance);
    }
  }
}

TEST(Fista, UnitWeightSlopeAgreesWithL1) {
  std::mt19937_64 rng(37);
  for (int rep = 0; rep < 50; ++rep) {
    const Index d = 10 + rep % 20;
    const Param t = gaussian_vector(rng, d);
    const Dataset data = gaussian_data(rng, 40, d, t, 0.5);
    const SolveResult a = fista_solve(data, RegNorm::l1(d), tight(0.08));
    const SolveResult b = fista_solve(data, RegNorm::slope(Vector::Ones(d)), tight(0.08));
    EXPECT_LE((a.estimate - b.estimate).norm(), 1e-6);
  }
}

TEST(Fista, IterationCapFlagsNonConvergence) {
  std::mt19937_64 rng(38);
  const Param t = gaussian_vector(rng, 40);
  const Dataset data = gaussian_data(rng, 30, 40, t, 0.5);
  SolveConfig cfg = tight(0.01);
  cfg.max_iterations = 3;
  const SolveResult res = fista_solve(data, RegNorm::l1(40), cfg);
  EXPECT_FALSE(res.converged);
  EXPECT_LE(res.iterations, 3);
}

TEST(Fista, RejectsBadInput) {
  Dataset data = identity_data(Vector::Ones(3));
  SolveConfig cfg;
  cfg.lambda = -1;
  EXPECT_THROW(fista_solve(data, RegNorm::l1(3), cfg), std::invalid_argument);
  cfg.lambda = 0.1;
  EXPECT_THROW(fista_solve(data, RegNorm::l1(4), cfg), ShapeError);
}

TEST(OperatorNorm, MatchesEigenvalue) {
  std::mt19937_64 rng(39);
  const Dataset data = gaussian_data(rng, 30, 12, gaussian_vector(rng, 12), 0.0);
  const Matrix gram = data.X.transpose() * data.X;
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  EXPECT_NEAR(operator_norm_sq(data, 200), es.eigenvalues().maxCoeff(), 1e-6 * es.eigenvalues().maxCoeff());
}
