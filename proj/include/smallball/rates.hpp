#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "smallball/models.hpp"
#include "smallball/norms.hpp"
#include "smallball/solver.hpp"

namespace smallball {

// ---------------------------------------------------------------------------
// Gaussian mean width of rho*B_Psi intersected with r*D, where D is the unit
// ball of the L2(mu) metric.

/// Absolute constants in front of the closed-form width bounds.
struct WidthConstants {
  // sup-norm term of the l1 bound. sqrt(2 log(ed)) dominates E||g||_inf for every d.
  double l1 = M_SQRT2;
  // E max_k (sum of the k largest |g_i|) / (sum of the k largest beta_i) exceeds 1.
  double slope = M_SQRT2;
  // E||G||_op is about sqrt(m) + sqrt(T), up to twice sqrt(max(m, T)). Applies to
  // the operator-norm branch only.
  double trace = 2.0;
};

/// Upper bound on the mean width; nondecreasing in rho and r, and
/// width(c rho, c r) = c width(rho, r). Throws for the trace norm with a
/// correlated design.
double width_closed_form(const RegNorm& norm, double rho, double r, const DesignModel& design,
                         const WidthConstants& c = {});

struct WidthEstimate {
  double lower_mean = 0.0;
  double lower_se = 0.0;
  double upper_mean = 0.0;
  double upper_se = 0.0;
  std::int64_t trials = 0;
};

/// Monte Carlo sandwich for the mean width: per Gaussian sample an upper bound
/// on the supremum (exact for l1) and the best of a few feasible points.
WidthEstimate width_mc(const RegNorm& norm, double rho, double r, const DesignModel& design,
                       std::int64_t trials, std::uint64_t seed);

/// Per-sample pieces of width_mc, exposed for testing.
double l1_support(const Vector& g, double rho, double r);
double slope_ksplit_bound(const Vector& g, const Vector& beta, double rho, double r);

// ---------------------------------------------------------------------------
// Small-ball constants.

struct SmallBallEstimate {
  double kappa = 0.0;
  double epsilon = 0.0;
  double theta = 0.0;  // kappa^2 epsilon / 16
  std::int64_t samples = 0;
};

/// Pr(|<t, X>| >= kappa ||<t, .>||_{L2}) for one direction t.
double small_ball_probability(const DesignModel& design, const Param& direction, double kappa,
                              std::int64_t samples, std::uint64_t seed);

/// Minimum of small_ball_probability over `directions` random directions.
SmallBallEstimate small_ball_estimate(const DesignModel& design, double kappa, std::int64_t samples,
                                      std::uint64_t seed, int directions = 8);

/// kappa = 0.5 estimate for the design's kind and dimension, 1e5 samples,
/// fixed seed, memoized.
const SmallBallEstimate& default_small_ball(const DesignModel& design);

// ---------------------------------------------------------------------------
// Critical levels.

struct RateConstants {
  std::optional<double> c_Q;  // default kappa * epsilon / 32
  std::optional<double> c_M;  // default theta / 10
  double c_L = 2.0;           // r_Q = 0 once N >= c_L * dim
  double c_quadratic = 1.0;   // C(L) in the quadratic fixed point
  double c_multiplier = 1.0;  // c(L, q, delta) in the multiplier fixed point
  double kappa = 0.5;
  std::optional<double> epsilon;  // default from default_small_ball
  WidthConstants width;
};

struct RateReport {
  double rho = 0.0;
  double r_Q = 0.0;
  double r_M = 0.0;
  double r = 0.0;
  double kappa = 0.0;
  double epsilon = 0.0;
  double theta = 0.0;
  double gamma_O_bound = 0.0;  // theta r^2 / 8
  double delta = 0.0;
  double c_Q = 0.0;
  double c_M = 0.0;
  double lq_norm = 0.0;
  Index N = 0;
};

struct ResolvedConstants {
  double kappa;
  double epsilon;
  double theta;
  double c_Q;
  double c_M;
};

ResolvedConstants resolve_constants(const DesignModel& design, const RateConstants& constants);

/// r_Q, r_M and r at rho by bisection on the width fixed-point inequalities.
/// Throws std::runtime_error when no bracket can be found.
RateReport rate_fixed_point(const RegNorm& norm, const DesignModel& design, const NoiseModel& noise, Index N,
                            double delta, double rho, const RateConstants& constants = {});

struct ClosedFormRates {
  double r_Q2 = 0.0;
  double r_M2 = 0.0;
};

/// Case-by-case closed forms for r_Q^2 and r_M^2 with all hidden constants 1.
ClosedFormRates rate_closed_form(const RegNorm& norm, const DesignModel& design, double lq_norm, Index N,
                                 double rho, double c_L = 2.0);

// ---------------------------------------------------------------------------
// Excess-loss decomposition on a sample.

struct Decomposition {
  double quadratic = 0.0;  // (1/N) sum <t - t*, X_i>^2
  double cross = 0.0;      // (2/N) sum xi_i <t - t*, X_i>, xi_i = <t*, X_i> - y_i
  double total = 0.0;      // (1/N) sum (y_i - <t, X_i>)^2 - (y_i - <t*, X_i>)^2
};

Decomposition empirical_decomposition(const Dataset& data, const Param& t, const Param& t_star);

}  // namespace smallball
