#include "smallball/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>
#include <stdexcept>

namespace smallball {

std::string to_string(Regime regime) { return regime == Regime::Isotropic ? "isotropic" : "non-isotropic"; }

SparsityCheck sparsity_condition(const RegNorm& norm, Index s, double rho, double r, Regime regime,
                                 const LemmaConstants& lc) {
  if (s < 1) throw std::invalid_argument("sparsity_condition needs s >= 1");
  if (!(rho > 0.0) || !(r >= 0.0)) throw std::domain_error("sparsity_condition needs rho > 0 and r >= 0");
  const Index cap = norm.is_matrix() ? std::min(norm.rows(), norm.cols()) : norm.dim();
  if (s > cap) throw std::out_of_range("sparsity_condition: s exceeds the largest possible support/rank");

  SparsityCheck c;
  c.kind = norm.kind();
  c.s = s;
  c.rho = rho;
  c.r = r;
  const double ratio = r > 0.0 ? rho / r : std::numeric_limits<double>::infinity();
  const double ss = static_cast<double>(s);

  if (regime == Regime::Isotropic) {
    switch (norm.kind()) {
      case NormKind::L1:
        c.lhs = lc.l1 * ss;
        c.rhs = ratio * ratio;
        break;
      case NormKind::Slope:
        c.lhs = lc.slope * calB(norm.weights(), s);
        c.rhs = ratio;
        break;
      case NormKind::Trace:
        c.lhs = lc.trace * ss;
        c.rhs = ratio * ratio;
        break;
    }
  } else {
    switch (norm.kind()) {
      case NormKind::L1:
        c.lhs = lc.l1_noniso * calB(Vector::Ones(norm.dim()), s);
        c.rhs = ratio;
        break;
      case NormKind::Slope:
        c.lhs = lc.slope_noniso * calB(norm.weights(), s);
        c.rhs = ratio;
        break;
      case NormKind::Trace:
        throw std::invalid_argument("sparsity_condition: no non-isotropic condition for the trace norm");
    }
  }
  c.satisfied = c.lhs <= c.rhs;
  c.delta_lower_bound = c.satisfied ? 0.8 * rho : 0.0;
  return c;
}

RhoStar rho_star(const RegNorm& norm, Index s, Index N, const DesignModel& design, const NoiseModel& noise,
                 double delta, const RateConstants& constants, const LemmaConstants& lc) {
  if (N < 1) throw std::invalid_argument("rho_star needs N >= 1");
  const Regime regime = design.isotropic() ? Regime::Isotropic : Regime::NonIsotropic;
  const double n = static_cast<double>(N);
  const double ss = static_cast<double>(s);
  double complexity = 0.0;
  if (norm.is_matrix()) complexity = static_cast<double>(std::max(norm.rows(), norm.cols()));
  else complexity = std::log(M_E * static_cast<double>(norm.dim()));
  const double lq = noise.lq_norm();
  const double guess = ss * (lq > 0.0 ? lq : 1.0) * std::sqrt(complexity / n);

  // Resolve the small-ball constants once rather than at every grid point.
  RateConstants fixed = constants;
  const ResolvedConstants rc = resolve_constants(design, constants);
  fixed.epsilon = rc.epsilon;

  const double factor = 1.1;
  const double lo = 1e-4 * guess;
  const double hi = 1e10 * guess;
  RateReport last;
  for (double rho = lo; rho <= hi * (1.0 + 1e-12); rho *= factor) {
    const RateReport rep = rate_fixed_point(norm, design, noise, N, delta, rho, fixed);
    const SparsityCheck chk = sparsity_condition(norm, s, rho, rep.r, regime, lc);
    if (chk.satisfied) return {rho, rep, chk};
    last = rep;
  }
  std::ostringstream os;
  os << "sparsity condition fails on the whole rho grid [" << lo << ", " << hi << "] for norm "
     << to_string(norm.kind()) << " with s=" << s << ", N=" << N << "; binding constraint: "
     << (last.r_Q >= last.r_M ? "r_Q" : "r_M") << " (r_Q=" << last.r_Q << ", r_M=" << last.r_M << ")";
  throw std::runtime_error(os.str());
}

std::string to_string(LambdaRule rule) {
  switch (rule) {
    case LambdaRule::Midpoint:
      return "midpoint";
    case LambdaRule::Lower:
      return "lower";
    case LambdaRule::Explicit:
      return "explicit";
  }
  return "unknown";
}

LambdaRule parse_lambda_rule(const std::string& name) {
  if (name == "midpoint") return LambdaRule::Midpoint;
  if (name == "lower") return LambdaRule::Lower;
  if (name == "explicit") return LambdaRule::Explicit;
  throw std::invalid_argument("unknown lambda rule '" + name + "'");
}

LambdaWindow lambda_window(const RateReport& report, std::optional<double> psi_target) {
  if (!(report.rho > 0.0)) throw std::domain_error("lambda_window needs rho > 0");
  LambdaWindow w;
  const double base = report.theta * report.r * report.r / report.rho;
  w.lower = 3.0 * base / 8.0;
  w.unbounded = psi_target.has_value() && report.rho >= *psi_target;
  w.upper = w.unbounded ? std::numeric_limits<double>::infinity() : base / 2.0;
  return w;
}

double lambda_select(const RateReport& report, const LambdaPolicy& policy, std::optional<double> psi_target) {
  const LambdaWindow w = lambda_window(report, psi_target);
  if (!(w.lower < w.upper) || !(w.lower > 0.0))
    throw std::runtime_error("lambda window is empty (r(rho) = " + std::to_string(report.r) + ")");
  switch (policy.rule) {
    case LambdaRule::Midpoint:
      return 7.0 * report.theta * report.r * report.r / (16.0 * report.rho);
    case LambdaRule::Lower:
      return w.lower;
    case LambdaRule::Explicit:
      if (!(policy.value >= w.lower) || !(policy.value < w.upper)) {
        std::ostringstream os;
        os << "explicit lambda " << policy.value << " lies outside the window [" << w.lower << ", " << w.upper << ")";
        throw std::invalid_argument(os.str());
      }
      return policy.value;
  }
  return w.lower;
}

NonIsoCheck assumption_noniso_check(const Matrix& sigma, Index s, const Vector& beta, std::int64_t samples,
                                    std::uint64_t seed) {
  const Index d = sigma.rows();
  if (beta.size() != d) throw ShapeError("assumption_noniso_check: weights and covariance differ in size");
  if (samples < 1) throw std::invalid_argument("assumption_noniso_check needs samples >= 1");
  const RegNorm norm = RegNorm::slope(beta);
  const Matrix root = psd_sqrt(sigma);
  const double radius = 20.0 * calB(beta, s);

  NonIsoCheck out;
  out.sigma = root.rowwise().norm().maxCoeff();
  out.worst_ratio = std::numeric_limits<double>::infinity();

  auto consider = [&](Vector x) {
    const double psi = norm_eval(norm, x);
    if (!(psi > 0.0)) return;
    x *= radius / psi;
    const double metric = (root * x).norm();
    if (metric > 1.0) return;
    ++out.feasible;
    const Vector sorted = rearrange(x);
    const double head = sorted.head(s).norm();
    const double ratio = 2.0 * metric / head;
    if (ratio < out.worst_ratio) {
      out.worst_ratio = ratio;
      out.witness = x;
    }
  };

  // Deterministic candidates: coordinate vectors and covariance eigenvectors,
  // which contain the directions where Sigma^{1/2} is smallest.
  for (Index i = 0; i < d; ++i) consider(Vector::Unit(d, i));
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
  for (Index i = 0; i < d; ++i) consider(eig.eigenvectors().col(i));

  Rng rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_int_distribution<Index> support_size(1, d);
  for (std::int64_t k = 0; k < samples; ++k) {
    Vector x(d);
    for (Index i = 0; i < d; ++i) x[i] = normal(rng);
    if (k % 2 == 1) {
      // Sparse direction: keep a random number of leading coordinates of a random permutation.
      const Index keep = support_size(rng);
      std::vector<Index> idx(static_cast<std::size_t>(d));
      for (Index i = 0; i < d; ++i) idx[static_cast<std::size_t>(i)] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      for (Index j = keep; j < d; ++j) x[idx[static_cast<std::size_t>(j)]] = 0.0;
    }
    consider(std::move(x));
  }

  out.vacuous = out.feasible == 0;
  out.passed = out.vacuous || out.worst_ratio >= 1.0;
  if (out.vacuous) out.worst_ratio = std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace smallball
