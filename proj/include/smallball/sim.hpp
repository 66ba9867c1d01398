#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "smallball/models.hpp"
#include "smallball/norms.hpp"
#include "smallball/rates.hpp"
#include "smallball/solver.hpp"
#include "smallball/sparsity.hpp"

namespace smallball {

/// t* = v + u with v s-sparse (or rank s) and Psi(u) = budget.
struct TargetSpec {
  Index s = 0;
  double amplitude = 1.0;
  double budget = 0.0;
  Param v;
  Param u;
  Param t_star;
};

/// Random support with +-amplitude entries for vector norms; for the trace
/// norm a rank-s matrix U diag(amplitude) V^T with orthonormal U, V.
TargetSpec make_target(const RegNorm& norm, Index s, double amplitude, double budget, std::uint64_t seed);

/// y_i = <t*, X_i> - xi_i with rows from `design` and xi from `noise`.
Dataset sample_data(const DesignModel& design, const NoiseModel& noise, const TargetSpec& target, Index N,
                    std::uint64_t seed);

/// Settings for the theory-driven choice of lambda and the solver.
struct PipelineConfig {
  double delta = 0.05;
  RateConstants rates;
  LemmaConstants lemma;
  LambdaPolicy policy;
  SolveConfig solve;
  double p = 1.5;  // exponent of the recorded l_p error
};

struct LambdaChoice {
  double lambda = 0.0;
  double rho_star = 0.0;
  double r = 0.0;
  RateReport report;
};

/// rate_fixed_point -> rho_star -> lambda_select.
LambdaChoice auto_lambda(const RegNorm& norm, const DesignModel& design, const NoiseModel& noise, Index s,
                         Index N, const PipelineConfig& cfg);

struct ErrorRecord {
  // Schatten norms of the error for matrix problems.
  double l1 = 0.0;
  double l2 = 0.0;
  double lp = 0.0;
  double p = 1.5;
  double psi = 0.0;     // Psi(t_hat - t*)
  double metric = 0.0;  // ||Sigma^{1/2}(t_hat - t*)||_2
  double lambda = 0.0;
  double rho_star = 0.0;  // 0 when lambda was given
  double r = 0.0;
  bool converged = false;
  double kkt = 0.0;
  int iterations = 0;
  double objective = 0.0;
};

ErrorRecord error_record(const RegNorm& norm, const DesignModel& design, const Param& estimate,
                         const Param& t_star, double p);

/// One replicate: sample, solve, measure. Without `lambda` the theory-driven
/// value is computed (pass `choice` to reuse one).
ErrorRecord run_trial(const RegNorm& norm, const DesignModel& design, const NoiseModel& noise,
                      const TargetSpec& target, Index N, std::optional<double> lambda, std::uint64_t seed,
                      const PipelineConfig& cfg = {}, const LambdaChoice* choice = nullptr);

// ---------------------------------------------------------------------------

struct Shape {
  Index rows = 1;
  Index cols = 1;
  friend bool operator==(const Shape&, const Shape&) = default;
};

struct ExperimentSpec {
  NormKind norm = NormKind::L1;
  double slope_constant = 1.0;
  std::optional<Vector> slope_weights;  // overrides the generated weights

  DesignKind design = DesignKind::IsotropicGaussian;
  double toeplitz = 0.5;                // correlated design without an explicit covariance
  std::optional<Matrix> covariance;

  NoiseModel noise;

  std::vector<Index> N_values;
  std::vector<Shape> shapes;
  std::vector<Index> s_values;
  int replications = 1;
  std::uint64_t seed = 0;

  double amplitude = 1.0;
  double budget = 0.0;                  // Psi(u) of the target perturbation
  std::optional<double> lambda;         // fixed lambda; unset = theory-driven
  PipelineConfig pipeline;
  int threads = 1;

  void validate() const;
};

struct Cell {
  Index N = 0;
  Shape shape;
  Index s = 0;
  std::string key() const;
};

struct TrialRecord {
  Cell cell;
  int replicate = 0;
  std::uint64_t seed = 0;
  bool ok = false;       // false when the trial threw
  std::string message;   // failure diagnostic
  ErrorRecord errors;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;  // cell-major, replicate-minor
  std::vector<Cell> cells;
};

RegNorm build_norm(const ExperimentSpec& spec, Shape shape);
DesignModel build_design(const ExperimentSpec& spec, Shape shape);

/// Deterministic 64-bit mixing used for every derived seed.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a(const std::string& text);
std::uint64_t trial_seed(std::uint64_t base, const Cell& cell, int replicate);

/// Cells of the full factorial grid in canonical order (N fastest varying last).
std::vector<Cell> experiment_cells(const ExperimentSpec& spec);

using RecordSink = std::function<void(const TrialRecord&)>;

/// Runs every replicate of every cell on up to spec.threads workers. Records
/// reach `sink` in canonical order as soon as their predecessors are done, so
/// the stream is identical for any thread count. Failures are recorded and the
/// sweep continues.
ExperimentResult run_experiment(const ExperimentSpec& spec, const RecordSink& sink = {});

// ---------------------------------------------------------------------------

enum class Predictor { N, S, D, MaxMT };
enum class Statistic { L2Squared, L2, L1, Lp, Psi, MetricSquared, Metric };

std::string to_string(Predictor p);
std::string to_string(Statistic s);
Predictor parse_predictor(const std::string& name);
Statistic parse_statistic(const std::string& name);
double statistic_value(const ErrorRecord& e, Statistic s);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_low = 0.0;   // bootstrap 5% quantile
  double ci_high = 0.0;  // bootstrap 95% quantile
  std::vector<double> levels;
  std::vector<double> medians;
};

double median(std::vector<double> values);

/// OLS slope of log(median response) on log(level), with a bootstrap 90% CI
/// that resamples replicates within each level. Needs >= 3 levels and
/// positive medians.
ScalingFit fit_scaling(const std::vector<double>& levels, const std::vector<std::vector<double>>& replicates,
                       std::uint64_t seed = 20240229, int bootstrap = 1000);

/// Groups the successful records by predictor level.
ScalingFit fit_scaling(const ExperimentResult& result, Predictor predictor, Statistic response,
                       std::uint64_t seed = 20240229, int bootstrap = 1000);

}  // namespace smallball
