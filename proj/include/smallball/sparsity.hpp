#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "smallball/models.hpp"
#include "smallball/norms.hpp"
#include "smallball/rates.hpp"

namespace smallball {

enum class Regime { Isotropic, NonIsotropic };

std::string to_string(Regime regime);

/// Constants of the per-norm sufficient conditions for Delta(rho) >= 4 rho / 5.
struct LemmaConstants {
  double l1 = 100.0;            // l1:    l1 * s <= (rho/r)^2
  double slope = 40.0;          // SLOPE: slope * B_s <= rho/r
  double trace = 400.0;         // trace: trace * rank <= (rho/r)^2
  double slope_noniso = 80.0;   // correlated SLOPE: slope_noniso * B_s <= rho/r
  double l1_noniso = 20.0;      // correlated l1: l1_noniso * sum_{j<=s} 1/sqrt(j) <= rho/r
};

struct SparsityCheck {
  NormKind kind = NormKind::L1;
  Index s = 0;
  double rho = 0.0;
  double r = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool satisfied = false;
  double delta_lower_bound = 0.0;  // 4 rho / 5 when satisfied, otherwise 0
};

SparsityCheck sparsity_condition(const RegNorm& norm, Index s, double rho, double r, Regime regime,
                                 const LemmaConstants& lc = {});

struct RhoStar {
  double rho = 0.0;
  RateReport report;
  SparsityCheck check;
};

/// Smallest rho on a geometric grid (factor 1.1, spanning 1e-4..1e10 times an
/// analytic guess) at which the sparsity condition holds with r = r(rho).
/// Throws std::runtime_error naming the binding critical level when no grid
/// point works.
RhoStar rho_star(const RegNorm& norm, Index s, Index N, const DesignModel& design, const NoiseModel& noise,
                 double delta, const RateConstants& constants = {}, const LemmaConstants& lc = {});

enum class LambdaRule { Midpoint, Lower, Explicit };

std::string to_string(LambdaRule rule);
LambdaRule parse_lambda_rule(const std::string& name);

struct LambdaPolicy {
  LambdaRule rule = LambdaRule::Midpoint;
  double value = 0.0;  // Explicit only
};

struct LambdaWindow {
  double lower = 0.0;  // 3 theta r^2 / (8 rho)
  double upper = 0.0;  // theta r^2 / (2 rho); +inf when the upper end is dropped
  bool unbounded = false;
};

LambdaWindow lambda_window(const RateReport& report, std::optional<double> psi_target = std::nullopt);

/// Lambda inside the admissible window. When psi_target (Psi(t*)) is given and
/// rho >= psi_target, the upper constraint is dropped.
double lambda_select(const RateReport& report, const LambdaPolicy& policy,
                     std::optional<double> psi_target = std::nullopt);

struct DeltaOracleResult {
  double delta = 0.0;
  bool h_empty = false;
  std::int64_t h_samples = 0;   // points of H evaluated
  std::int64_t gamma_size = 0;  // norming functionals in the Gamma approximation
};

/// Brute-force estimate of inf_{w in H} sup_{z in Gamma} <z, w> for l1 or SLOPE
/// at d <= 6, with H = {Psi(w) = rho, ||w||_2 <= r}. Empty H gives rho.
DeltaOracleResult delta_oracle(const RegNorm& norm, const Vector& t_star, double rho, double r,
                               std::int64_t samples, std::uint64_t seed);

struct NonIsoCheck {
  bool passed = false;
  double sigma = 0.0;          // max row norm of Sigma^{1/2}
  double worst_ratio = 0.0;    // min over feasible x of 2||Sigma^{1/2} x|| / sup_{|J|<=s} ||x_J||
  Vector witness;              // x attaining worst_ratio
  std::int64_t feasible = 0;   // sampled points inside (20 B_s S_Psi) intersect D
  bool vacuous = false;        // no feasible point was found
};

/// Randomized check of the correlated-design assumption for SLOPE / l1 weights beta.
NonIsoCheck assumption_noniso_check(const Matrix& sigma, Index s, const Vector& beta, std::int64_t samples,
                                    std::uint64_t seed);

}  // namespace smallball
