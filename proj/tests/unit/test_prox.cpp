#include <gtest/gtest.h>

#include <random>

#include "../oracles.hpp"
#include "smallball/prox.hpp"
#include "test_util.hpp"

using namespace smallball;
using smallball::test::gaussian_vector;
using smallball::test::random_slope_weights;

TEST(SoftThreshold, Examples) {
  Vector v(3);
  v << 3, -0.5, -2;
  const Vector out = soft_threshold(v, 1.0);
  EXPECT_DOUBLE_EQ(out[0], 2.0);
  EXPECT_DOUBLE_EQ(out[1], 0.0);
  EXPECT_DOUBLE_EQ(out[2], -1.0);
  EXPECT_EQ(soft_threshold(v, 0.0), v);
}

TEST(ProxSortedL1, Examples) {
  Vector v(2);
  v << 3, 1;
  Vector w(2);
  w << 2, 2;
  Vector expect(2);
  expect << 1, 0;
  EXPECT_TRUE(prox_sorted_l1(v, w).isApprox(expect));
  EXPECT_TRUE(prox_sorted_l1(v, w).isApprox(soft_threshold(v, 2.0)));
  EXPECT_EQ(prox_sorted_l1(Vector::Zero(2), w), Vector::Zero(2));
}

TEST(ProxSortedL1, MatchesEnumerationOracle) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 60; ++rep) {
    const Index d = 1 + rep % 6;
    const Vector v = gaussian_vector(rng, d, 2.0);
    const Vector w = random_slope_weights(rng, d);
    const Vector fast = prox_sorted_l1(v, w);
    const Vector ref = oracle::slope_prox_qp(v, w, true);
    EXPECT_LE((fast - ref).norm(), 1e-9) << "rep " << rep;
  }
}

TEST(ProxNuclear, Examples) {
  const RegNorm tr = RegNorm::trace(2, 2);
  Param a(4);
  a << 3, 0, 0, 1;
  Param expect(4);
  expect << 1, 0, 0, 0;
  EXPECT_LE((prox_nuclear(tr, a, 2.0) - expect).norm(), 1e-12);

  std::mt19937_64 rng(22);
  const RegNorm big = RegNorm::trace(6, 4);
  const Param m = gaussian_vector(rng, 24);
  EXPECT_LE((prox_nuclear(big, m, 0.0) - m).norm(), 1e-8);
}

TEST(ProxNuclear, NoPerturbationImproves) {
  std::mt19937_64 rng(23);
  const RegNorm tr = RegNorm::trace(6, 4);
  for (int rep = 0; rep < 5; ++rep) {
    const Param a = gaussian_vector(rng, 24);
    const double t = 0.5 + rep * 0.3;
    const Param x = prox_nuclear(tr, a, t);
    const Matrix X = as_matrix(tr, x);
    const Matrix A = as_matrix(tr, a);
    const double val = oracle::nuclear_objective(X, A, t);
    EXPECT_GE(oracle::nuclear_perturbation_search(X, A, t, 2000, rng), val - 1e-9);
  }
}

TEST(Prox, WithValueReportsPsiOfTheResult) {
  std::mt19937_64 rng(24);
  const std::vector<RegNorm> norms = {RegNorm::l1(7), RegNorm::slope_generated(7, 1.0), RegNorm::trace(3, 4)};
  for (const auto& n : norms) {
    const Param v = gaussian_vector(rng, n.dim(), 2.0);
    const ProxValue pv = prox_with_value(n, v, 0.3);
    EXPECT_LE((pv.x - prox(n, v, 0.3)).norm(), 1e-12);
    EXPECT_NEAR(pv.psi, norm_eval(n, pv.x), 1e-10);
  }
}

TEST(ProxProperties, NonexpansiveForAllNorms) {
  std::mt19937_64 rng(25);
  const std::vector<RegNorm> norms = {RegNorm::l1(8), RegNorm::slope(random_slope_weights(rng, 8)),
                                      RegNorm::trace(4, 2)};
  for (const auto& n : norms) {
    for (int rep = 0; rep < 1000; ++rep) {
      const Param u = gaussian_vector(rng, n.dim(), 2.0);
      const Param v = gaussian_vector(rng, n.dim(), 2.0);
      EXPECT_LE((prox(n, u, 0.7) - prox(n, v, 0.7)).norm(), (u - v).norm() * (1 + 1e-12) + 1e-12);
    }
  }
}

TEST(ProxProperties, LocalOptimalityAgainstPerturbations) {
  std::mt19937_64 rng(26);
  std::normal_distribution<double> nd;
  const std::vector<RegNorm> norms = {RegNorm::l1(5), RegNorm::slope(random_slope_weights(rng, 5)),
                                      RegNorm::trace(3, 2)};
  for (const auto& n : norms) {
    const Param v = gaussian_vector(rng, n.dim(), 2.0);
    const double t = 0.6;
    const Param x = prox(n, v, t);
    auto value = [&](const Param& z) { return 0.5 * (z - v).squaredNorm() + t * norm_eval(n, z); };
    const double base = value(x);
    for (int k = 0; k < 1000; ++k) {
      const double scale = std::pow(10.0, -1 - k % 5);
      EXPECT_GE(value(x + scale * gaussian_vector(rng, n.dim())), base - 1e-9);
    }
  }
}
