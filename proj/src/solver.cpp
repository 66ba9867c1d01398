#include "smallball/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "smallball/prox.hpp"

namespace smallball {

void Dataset::validate(const RegNorm& norm) const {
  if (N() < 1) throw ShapeError("dataset needs at least one sample");
  if (y.size() != N()) throw ShapeError("response length differs from the number of design rows");
  if (dim() != norm.dim()) {
    throw ShapeError("design has " + std::to_string(dim()) + " columns, norm expects " +
                     std::to_string(norm.dim()));
  }
}

Vector apply_design(const Dataset& data, const Param& t) {
  Vector out(data.N());
  kernels::gemv(data.view(), {t.data(), static_cast<std::size_t>(t.size())},
                {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

Param apply_design_t(const Dataset& data, const Vector& r) {
  Param out(data.dim());
  kernels::gemv_t(data.view(), {r.data(), static_cast<std::size_t>(r.size())},
                  {out.data(), static_cast<std::size_t>(out.size())});
  return out;
}

double operator_norm_sq(const Dataset& data, int iterations) {
  const Index d = data.dim();
  if (d == 0 || data.N() == 0) return 0.0;
  // Fixed pseudo-random start so the result is reproducible and almost surely
  // not orthogonal to the top singular vector.
  std::mt19937_64 gen(0x5eedULL);
  std::normal_distribution<double> normal;
  Param v(d);
  for (Index i = 0; i < d; ++i) v[i] = normal(gen);
  v.normalize();
  double estimate = 0.0;
  for (int k = 0; k < std::max(iterations, 1); ++k) {
    const Vector xv = apply_design(data, v);
    estimate = xv.squaredNorm();
    Param w = apply_design_t(data, xv);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
  }
  return std::max(estimate, apply_design(data, v).squaredNorm());
}

void SolveConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  if (step && !(*step > 0.0)) throw std::invalid_argument("step must be positive");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (kkt_check_every < 1) throw std::invalid_argument("kkt_check_every must be >= 1");
}

double objective(const Dataset& data, const RegNorm& norm, double lambda, const Param& t) {
  data.validate(norm);
  const Vector r = apply_design(data, t) - data.y;
  return r.squaredNorm() / static_cast<double>(data.N()) + lambda * norm_eval(norm, t);
}

namespace {

struct Cluster {
  Index begin;  // position range in the sorted order
  Index end;
};

// Largest violation of "prefix sums of u (sorted desc) <= prefix sums of w",
// and, when `equal_total`, of "sum u == sum w".
double majorization_slack(std::vector<double> u, const double* w, bool equal_total) {
  std::sort(u.begin(), u.end(), std::greater<>());
  double su = 0.0;
  double sw = 0.0;
  double slack = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    su += u[k];
    sw += w[k];
    slack = std::max(slack, su - sw);
  }
  if (equal_total) slack = std::max(slack, std::fabs(su - sw));
  return slack;
}

double slope_slack(const Vector& beta, double lambda, const Param& t, const Param& g) {
  const Index d = t.size();
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::fabs(t[a]) > std::fabs(t[b]); });
  const Vector w = lambda * beta;

  double slack = 0.0;
  Index k = 0;
  while (k < d) {
    const double mag = std::fabs(t[order[static_cast<std::size_t>(k)]]);
    Index e = k + 1;
    while (e < d && std::fabs(t[order[static_cast<std::size_t>(e)]]) == mag) ++e;
    std::vector<double> u;
    u.reserve(static_cast<std::size_t>(e - k));
    for (Index p = k; p < e; ++p) {
      const Index i = order[static_cast<std::size_t>(p)];
      u.push_back(mag == 0.0 ? std::fabs(g[i]) : g[i] * (t[i] > 0.0 ? 1.0 : -1.0));
    }
    slack = std::max(slack, majorization_slack(std::move(u), w.data() + k, mag != 0.0));
    k = e;
  }
  return slack;
}

double trace_slack(const RegNorm& norm, double lambda, const Param& t, const Param& g) {
  Eigen::JacobiSVD<Matrix> svd(as_matrix(norm, t), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sigma = svd.singularValues();
  const double cutoff = 1e-9 * std::max(sigma[0], 1e-300);
  Index rank = 0;
  while (rank < sigma.size() && sigma[rank] > cutoff) ++rank;

  const Matrix G = as_matrix(norm, g);
  const Matrix& U = svd.matrixU();
  const Matrix& V = svd.matrixV();
  const Matrix M = U.transpose() * G * V;  // G in the singular bases
  const Index m = M.rows();
  const Index T = M.cols();

  double slack = 0.0;
  if (rank > 0) {
    const Matrix top = M.topLeftCorner(rank, rank) - lambda * Matrix::Identity(rank, rank);
    slack = std::max(slack, top.cwiseAbs().maxCoeff());
    if (T > rank) slack = std::max(slack, M.topRightCorner(rank, T - rank).cwiseAbs().maxCoeff());
    if (m > rank) slack = std::max(slack, M.bottomLeftCorner(m - rank, rank).cwiseAbs().maxCoeff());
  }
  if (m > rank && T > rank) {
    const Matrix rest = M.bottomRightCorner(m - rank, T - rank);
    const double op = Eigen::JacobiSVD<Matrix>(rest).singularValues()[0];
    slack = std::max(slack, op - lambda);
  }
  return std::max(slack, 0.0);
}

}  // namespace

double subgradient_slack(const RegNorm& norm, double lambda, const Param& t, const Param& g) {
  norm.check_shape(t);
  norm.check_shape(g);
  if (!t.allFinite() || !g.allFinite()) return std::numeric_limits<double>::infinity();
  if ((t.array() == 0.0).all()) return std::max(0.0, dual_norm_eval(norm, g) - lambda);

  switch (norm.kind()) {
    case NormKind::L1: {
      double slack = 0.0;
      for (Index i = 0; i < t.size(); ++i) {
        const double s = t[i] == 0.0 ? std::fabs(g[i]) - lambda
                                     : std::fabs(g[i] - lambda * (t[i] > 0.0 ? 1.0 : -1.0));
        slack = std::max(slack, s);
      }
      return slack;
    }
    case NormKind::Slope:
      return slope_slack(norm.weights(), lambda, t, g);
    case NormKind::Trace:
      return trace_slack(norm, lambda, t, g);
  }
  return 0.0;
}

double kkt_residual(const Dataset& data, const RegNorm& norm, double lambda, const Param& t) {
  data.validate(norm);
  norm.check_shape(t);
  const Vector r = apply_design(data, t) - data.y;
  const Param g = apply_design_t(data, r) * (-2.0 / static_cast<double>(data.N()));
  return subgradient_slack(norm, lambda, t, g);
}

SolveResult fista_solve(const Dataset& data, const RegNorm& norm, const SolveConfig& cfg) {
  data.validate(norm);
  cfg.validate();
  const Index d = data.dim();
  const double n = static_cast<double>(data.N());
  const double lambda = cfg.lambda;

  double step = 0.0;
  if (cfg.step) {
    step = *cfg.step;
  } else {
    const double op = operator_norm_sq(data, cfg.power_iterations);
    step = op > 0.0 ? n / (2.0 * op) : 1.0;
  }

  auto loss_of = [&](const Vector& fitted) { return (fitted - data.y).squaredNorm() / n; };

  Param x = Param::Zero(d);
  Param x_prev = x;
  Vector Xx = Vector::Zero(data.N());
  Vector Xx_prev = Xx;
  Param yv = x;
  Vector Xy = Xx;
  double fval = loss_of(Xx);
  double momentum = 1.0;
  bool accelerated = false;
  int quiet = 0;

  SolveResult result;
  result.iterations = 0;
  result.converged = false;

  auto rel_change = [](double before, double after) {
    const double scale = std::max(std::fabs(before), std::fabs(after));
    return scale > 0.0 ? std::fabs(before - after) / scale : 0.0;
  };

  for (int it = 1; it <= cfg.max_iterations; ++it) {
    result.iterations = it;
    const Vector resid = Xy - data.y;
    const Param grad = apply_design_t(data, resid) * (2.0 / n);
    const ProxValue pv = prox_with_value(norm, yv - step * grad, step * lambda);
    const Vector Xn = apply_design(data, pv.x);
    const double fn = loss_of(Xn) + lambda * pv.psi;

    if (!(fn <= fval)) {
      if (accelerated) {
        // Restart: drop the momentum and take a plain step from x.
        momentum = 1.0;
        yv = x;
        Xy = Xx;
        accelerated = false;
        continue;
      }
      if (std::isfinite(fn) && rel_change(fval, fn) <= cfg.tolerance) {
        // Rounding-level increase from a plain step: x is already stationary.
        if (++quiet >= 5) {
          result.converged = true;
          break;
        }
        continue;
      }
      // The power-method estimate was too small; shrink the step.
      step *= 0.5;
      continue;
    }

    const double change = rel_change(fval, fn);
    x_prev.swap(x);
    x = pv.x;
    Xx_prev.swap(Xx);
    Xx = Xn;
    fval = fn;

    const double next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next;
    momentum = next;
    yv = x + beta * (x - x_prev);
    Xy = Xx + beta * (Xx - Xx_prev);
    accelerated = beta > 0.0;

    quiet = change <= cfg.tolerance ? quiet + 1 : 0;
    if (quiet >= 5) {
      result.converged = true;
      break;
    }
    if (it % cfg.kkt_check_every == 0) {
      const Param g = apply_design_t(data, Xx - data.y) * (-2.0 / n);
      if (subgradient_slack(norm, lambda, x, g) <= cfg.tolerance) {
        result.converged = true;
        break;
      }
    }
  }

  // The accepted iterates have nonincreasing objective, so x is the best one.
  result.estimate = x;
  result.objective = fval;
  result.step = step;
  const Param g = apply_design_t(data, Xx - data.y) * (-2.0 / n);
  result.kkt = subgradient_slack(norm, lambda, x, g);
  if (!result.converged && result.kkt <= cfg.tolerance) result.converged = true;
  return result;
}

}  // namespace smallball
