#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "smallball/sparsity.hpp"
#include "test_util.hpp"

using namespace smallball;

TEST(SparsityCondition, Examples) {
  const RegNorm l1 = RegNorm::l1(10);
  const SparsityCheck ok = sparsity_condition(l1, 1, 2.0, 0.1, Regime::Isotropic);
  EXPECT_DOUBLE_EQ(ok.lhs, 100.0);
  EXPECT_NEAR(ok.rhs, 400.0, 1e-9);
  EXPECT_TRUE(ok.satisfied);
  EXPECT_DOUBLE_EQ(ok.delta_lower_bound, 1.6);
  EXPECT_FALSE(sparsity_condition(l1, 5, 2.0, 0.1, Regime::Isotropic).satisfied);

  const RegNorm unit = RegNorm::slope(Vector::Ones(8));
  const SparsityCheck slope = sparsity_condition(unit, 4, 1.0, 0.005, Regime::Isotropic);
  EXPECT_NEAR(slope.lhs, 40.0 * 2.7845, 0.01);
  EXPECT_NEAR(slope.rhs, 200.0, 1e-9);
  EXPECT_TRUE(slope.satisfied);
  EXPECT_FALSE(sparsity_condition(unit, 4, 1.0, 0.01, Regime::Isotropic).satisfied);

  EXPECT_THROW(sparsity_condition(l1, 11, 1.0, 0.1, Regime::Isotropic), std::out_of_range);
  EXPECT_THROW(sparsity_condition(RegNorm::trace(3, 3), 1, 1.0, 0.1, Regime::NonIsotropic), std::invalid_argument);
}

TEST(RhoStar, MinimalOnTheGrid) {
  const NoiseModel noise = NoiseModel::gaussian(1.0);
  const std::vector<std::pair<RegNorm, DesignModel>> cases = {
      {RegNorm::l1(64), DesignModel::isotropic_gaussian(64)},
      {RegNorm::slope_generated(64, 1.0), DesignModel::isotropic_gaussian(64)},
      {RegNorm::trace(4, 4), DesignModel::isotropic_gaussian(4, 4)},
  };
  for (const auto& [n, des] : cases) {
    const RhoStar rs = rho_star(n, 2, 256, des, noise, 0.05);
    EXPECT_TRUE(rs.check.satisfied);
    EXPECT_DOUBLE_EQ(rs.check.r, rs.report.r);
    const Regime reg = Regime::Isotropic;
    const double r_half = rate_fixed_point(n, des, noise, 256, 0.05, rs.rho / 2).r;
    EXPECT_FALSE(sparsity_condition(n, 2, rs.rho / 2, r_half, reg).satisfied);
    const double r_prev = rate_fixed_point(n, des, noise, 256, 0.05, rs.rho / 1.1).r;
    EXPECT_FALSE(sparsity_condition(n, 2, rs.rho / 1.1, r_prev, reg).satisfied);
  }
}

// Grid factor 1.1 between consecutive rho values bounds the spread of any
// ratio that is exactly constant off the grid.
constexpr double kGridSpread = 1.1 * (1 + 1e-9);

TEST(RhoStar, LassoScalesLikeSSqrtLogOverN) {
  // With lemma constant a, the binding point has (rho/r)^2 = a s, where the l1
  // width is c rho sqrt(log(e d / (a s))) while a s <= d. Taking a = 1 puts every
  // case in that regime, so rho* = (c / c_M) s ||xi|| sqrt(log(ed/s) / N).
  RateConstants rc;
  rc.c_L = 0.5;
  LemmaConstants lc;
  lc.l1 = 1.0;
  std::vector<double> ratios;
  for (double scale : {1.0, 3.0}) {
    const NoiseModel noise = NoiseModel::gaussian(scale);
    for (Index d : {64, 256}) {
      const RegNorm n = RegNorm::l1(d);
      const DesignModel des = DesignModel::isotropic_gaussian(d);
      for (Index s : {1, 2, 4}) {
        for (Index N : {256, 1024, 4096}) {
          const double rho = rho_star(n, s, N, des, noise, 0.05, rc, lc).rho;
          ratios.push_back(rho / (s * noise.lq_norm() * std::sqrt(std::log(M_E * d / s) / N)));
        }
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_LE(*hi / *lo, kGridSpread);
}

TEST(RhoStar, DefaultConstantsKeepTheInverseRootNScaling) {
  RateConstants rc;
  rc.c_L = 0.5;
  const NoiseModel noise = NoiseModel::gaussian(1.0);
  const RegNorm n = RegNorm::l1(256);
  const DesignModel des = DesignModel::isotropic_gaussian(256);
  for (Index s : {1, 4}) {
    std::vector<double> ratios;
    for (Index N : {256, 1024, 4096}) ratios.push_back(rho_star(n, s, N, des, noise, 0.05, rc).rho * std::sqrt(N));
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    EXPECT_LE(*hi / *lo, kGridSpread);
  }
}

TEST(RhoStar, QuadruplingNHalvesRho) {
  const NoiseModel noise = NoiseModel::student_t(1.0);
  const RegNorm n = RegNorm::l1(128);
  const DesignModel des = DesignModel::isotropic_gaussian(128);
  const double a = rho_star(n, 3, 512, des, noise, 0.05).rho;
  const double b = rho_star(n, 3, 2048, des, noise, 0.05).rho;
  EXPECT_NEAR(b / a, 0.5, 0.05);
}

TEST(RhoStar, TraceScalesLikeSSqrtMaxOverN) {
  // With lemma constant 1 the binding point has r = rho / sqrt(s), and the width
  // min(c rho sqrt(max), r sqrt(m T)) is on its operator-norm branch whenever
  // min(m, T) > c^2 s, so rho* = (c / c_M) s ||xi|| sqrt(max(m, T) / N).
  const NoiseModel noise = NoiseModel::gaussian(1.0);
  RateConstants rc;
  rc.c_L = 0.5;
  LemmaConstants lc;
  lc.trace = 1.0;
  std::vector<double> ratios;
  for (auto [m, T] : {std::pair<Index, Index>{9, 9}, {10, 14}, {12, 16}}) {
    const RegNorm n = RegNorm::trace(m, T);
    const DesignModel des = DesignModel::isotropic_gaussian(m, T);
    for (Index s : {1, 2}) {
      for (Index N : {200, 800, 3200}) {
        const double rho = rho_star(n, s, N, des, noise, 0.05, rc, lc).rho;
        ratios.push_back(rho / (s * noise.lq_norm() * std::sqrt(std::max(m, T) / static_cast<double>(N))));
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_LE(*hi / *lo, kGridSpread);
}

TEST(LambdaSelect, MidpointRuleAndWindow) {
  const RhoStar rs = rho_star(RegNorm::l1(32), 2, 200, DesignModel::isotropic_gaussian(32),
                              NoiseModel::gaussian(1.0), 0.05);
  const RateReport& rep = rs.report;
  const double lambda = lambda_select(rep, {});
  EXPECT_DOUBLE_EQ(lambda, 7.0 * rep.theta * rep.r * rep.r / (16.0 * rep.rho));
  const LambdaWindow w = lambda_window(rep);
  EXPECT_GE(lambda, w.lower);
  EXPECT_LT(lambda, w.upper);
  EXPECT_GE(lambda_select(rep, {LambdaRule::Lower, 0.0}), w.lower);
  EXPECT_THROW(lambda_select(rep, {LambdaRule::Explicit, w.upper}), std::invalid_argument);
  EXPECT_THROW(lambda_select(rep, {LambdaRule::Explicit, w.lower * 0.99}), std::invalid_argument);
  // Large-rho flag: no upper limit.
  EXPECT_DOUBLE_EQ(lambda_select(rep, {LambdaRule::Explicit, 1e6 * w.upper}, rep.rho), 1e6 * w.upper);
}

TEST(LambdaSelect, LassoLambdaScalesLikeNoiseTimesSqrtLogOverN) {
  // Same regime as the rho* scaling test: lambda = (7/16) theta r^2 / rho is
  // proportional to ||xi|| sqrt(log(e d / k) / N) with k = (rho*/r)^2 in
  // [s, 1.1 s] on the grid; that slack moves sqrt(log) by under 2% here.
  RateConstants rc;
  rc.c_L = 0.5;
  LemmaConstants lc;
  lc.l1 = 1.0;
  std::vector<double> ratios;
  for (Index d : {64, 256}) {
    for (double scale : {0.5, 2.0}) {
      const NoiseModel noise = NoiseModel::gaussian(scale);
      for (Index N : {256, 2048}) {
        const RhoStar rs = rho_star(RegNorm::l1(d), 3, N, DesignModel::isotropic_gaussian(d), noise, 0.05, rc, lc);
        ratios.push_back(lambda_select(rs.report, {}) / (noise.lq_norm() * std::sqrt(std::log(M_E * d / 3) / N)));
      }
    }
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  EXPECT_LE(*hi / *lo, 1.02);
}

TEST(DeltaOracle, EmptyHGivesRho) {
  Vector t(2);
  t << 1, 0;
  const DeltaOracleResult res = delta_oracle(RegNorm::l1(2), t, 0.1, 0.01, 1000, 1);
  EXPECT_TRUE(res.h_empty);
  EXPECT_DOUBLE_EQ(res.delta, 0.1);
}

TEST(DeltaOracle, TwoDimensionalAnalyticValue) {
  Vector t(2);
  t << 1, 0;
  const DeltaOracleResult res = delta_oracle(RegNorm::l1(2), t, 0.1, 0.08, 100000, 2);
  const double x_max = (0.2 + std::sqrt(0.0112)) / 4.0;
  EXPECT_NEAR(res.delta, 0.1 - 2 * x_max, 2e-3);
  EXPECT_NEAR(res.delta, -0.053, 2e-3);
  EXPECT_FALSE(res.h_empty);
}

TEST(DeltaOracle, UnitSlopeMatchesL1AndRespectsBounds) {
  std::mt19937_64 rng(51);
  for (int rep = 0; rep < 20; ++rep) {
    const Index d = 2 + rep % 5;
    Vector t = Vector::Zero(d);
    const Index s = 1 + rep % 2;
    for (Index i = 0; i < s; ++i) t[i] = (rep % 3 == 0 ? -1.0 : 1.0) * (1 + i);
    const double rho = 0.5, r = 0.05 + 0.05 * (rep % 6);
    const DeltaOracleResult a = delta_oracle(RegNorm::l1(d), t, rho, r, 20000, 3);
    const DeltaOracleResult b = delta_oracle(RegNorm::slope(Vector::Ones(d)), t, rho, r, 20000, 3);
    EXPECT_NEAR(a.delta, b.delta, 1e-9) << "d=" << d;
    EXPECT_LE(a.delta, rho + 1e-12);
    // z = sign(t*) on the support, sign(w) elsewhere gives rho - 2 sqrt(s) r.
    EXPECT_GE(a.delta, rho - 2 * std::sqrt(static_cast<double>(s)) * r - 1e-12);
  }
}

TEST(DeltaOracle, RejectsUnsupportedInputs) {
  EXPECT_THROW(delta_oracle(RegNorm::l1(7), Vector::Zero(7), 1, 1, 100, 1), std::invalid_argument);
  EXPECT_THROW(delta_oracle(RegNorm::trace(2, 2), Vector::Zero(4), 1, 1, 100, 1), std::invalid_argument);
}

TEST(NonIsoCheck, IdentityPasses) {
  const NonIsoCheck c = assumption_noniso_check(Matrix::Identity(10, 10), 2, slope_weights(10, 1.0), 5000, 1);
  EXPECT_TRUE(c.passed);
  EXPECT_NEAR(c.sigma, 1.0, 1e-12);
}

TEST(NonIsoCheck, DegenerateCovarianceFailsAlongNullDirection) {
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 1;
  const NonIsoCheck c = assumption_noniso_check(sigma, 1, Vector::Ones(2), 5000, 2);
  EXPECT_FALSE(c.passed);
  ASSERT_EQ(c.witness.size(), 2);
  EXPECT_LE(std::abs(c.witness[0]), 1e-12 * std::abs(c.witness[1]));
  EXPECT_GT(std::abs(c.witness[1]), 0.0);
}

TEST(NonIsoCheck, ToeplitzPasses) {
  const NonIsoCheck c = assumption_noniso_check(toeplitz_covariance(32, 0.5), 3, slope_weights(32, 1.0), 20000, 3);
  EXPECT_TRUE(c.passed);
}
