#include <algorithm>
#include <cmath>
#include <numeric>

#include "smallball/prox.hpp"
#include "smallball/sim.hpp"

namespace smallball {

TargetSpec make_target(const RegNorm& norm, Index s, double amplitude, double budget, std::uint64_t seed) {
  if (budget < 0.0 || !std::isfinite(budget)) throw std::invalid_argument("target budget must be finite and >= 0");
  if (!(amplitude > 0.0)) throw std::invalid_argument("target amplitude must be positive");
  const Index cap = norm.is_matrix() ? std::min(norm.rows(), norm.cols()) : norm.dim();
  if (s < 1 || s > cap) throw std::out_of_range("target sparsity must lie in [1, " + std::to_string(cap) + "]");

  Rng rng(seed);
  std::normal_distribution<double> normal;
  TargetSpec t;
  t.s = s;
  t.amplitude = amplitude;
  t.budget = budget;
  t.v = Param::Zero(norm.dim());

  if (norm.is_matrix()) {
    auto orthonormal = [&](Index rows) {
      Matrix g(rows, s);
      for (Index j = 0; j < s; ++j)
        for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
      Eigen::HouseholderQR<Matrix> qr(g);
      return Matrix(qr.householderQ() * Matrix::Identity(rows, s));
    };
    const Matrix U = orthonormal(norm.rows());
    const Matrix V = orthonormal(norm.cols());
    Eigen::Map<Matrix>(t.v.data(), norm.rows(), norm.cols()) = amplitude * U * V.transpose();
  } else {
    std::vector<Index> idx(static_cast<std::size_t>(norm.dim()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::bernoulli_distribution coin(0.5);
    for (Index j = 0; j < s; ++j) {
      std::uniform_int_distribution<Index> pick(j, norm.dim() - 1);
      std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(pick(rng))]);
      t.v[idx[static_cast<std::size_t>(j)]] = coin(rng) ? amplitude : -amplitude;
    }
  }

  t.u = Param::Zero(norm.dim());
  if (budget > 0.0) {
    Param g(norm.dim());
    for (Index i = 0; i < g.size(); ++i) g[i] = normal(rng);
    t.u = g * (budget / norm_eval(norm, g));
  }
  t.t_star = t.v + t.u;
  return t;
}

Dataset sample_data(const DesignModel& design, const NoiseModel& noise, const TargetSpec& target, Index N,
                    std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("sample_data needs N >= 1");
  if (target.t_star.size() != design.dim()) throw ShapeError("sample_data: target and design dimensions differ");
  noise.validate();
  Rng rng(seed);
  Dataset data;
  data.X = design.sample(N, rng);
  data.y = apply_design(data, target.t_star);
  for (Index i = 0; i < N; ++i) data.y[i] -= noise.sample(rng);
  return data;
}

LambdaChoice auto_lambda(const RegNorm& norm, const DesignModel& design, const NoiseModel& noise, Index s,
                         Index N, const PipelineConfig& cfg) {
  const RhoStar rs = rho_star(norm, s, N, design, noise, cfg.delta, cfg.rates, cfg.lemma);
  LambdaChoice c;
  c.rho_star = rs.rho;
  c.r = rs.report.r;
  c.report = rs.report;
  c.lambda = lambda_select(rs.report, cfg.policy);
  return c;
}

ErrorRecord error_record(const RegNorm& norm, const DesignModel& design, const Param& estimate,
                         const Param& t_star, double p) {
  norm.check_shape(estimate);
  norm.check_shape(t_star);
  const Param diff = estimate - t_star;
  ErrorRecord e;
  e.p = p;
  if (norm.is_matrix()) {
    const Vector sv = singular_values(norm, diff);
    e.l1 = sv.sum();
    e.l2 = diff.norm();
    e.lp = lp_norm(sv, p);
  } else {
    e.l1 = diff.cwiseAbs().sum();
    e.l2 = diff.norm();
    e.lp = lp_norm(diff, p);
  }
  e.psi = norm_eval(norm, diff);
  e.metric = design.metric_norm(diff);
  return e;
}

ErrorRecord run_trial(const RegNorm& norm, const DesignModel& design, const NoiseModel& noise,
                      const TargetSpec& target, Index N, std::optional<double> lambda, std::uint64_t seed,
                      const PipelineConfig& cfg, const LambdaChoice* choice) {
  if (design.dim() != norm.dim()) throw ShapeError("run_trial: design and norm dimensions differ");
  LambdaChoice local;
  if (!lambda) {
    if (choice == nullptr) {
      local = auto_lambda(norm, design, noise, target.s, N, cfg);
      choice = &local;
    }
  }
  const double lam = lambda ? *lambda : choice->lambda;

  const Dataset data = sample_data(design, noise, target, N, seed);
  SolveConfig sc = cfg.solve;
  sc.lambda = lam;
  const SolveResult res = fista_solve(data, norm, sc);

  ErrorRecord e = error_record(norm, design, res.estimate, target.t_star, cfg.p);
  e.lambda = lam;
  if (!lambda) {
    e.rho_star = choice->rho_star;
    e.r = choice->r;
  }
  e.converged = res.converged;
  e.kkt = res.kkt;
  e.iterations = res.iterations;
  e.objective = res.objective;
  return e;
}

}  // namespace smallball
