#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "smallball/rates.hpp"

namespace smallball {

ResolvedConstants resolve_constants(const DesignModel& design, const RateConstants& constants) {
  ResolvedConstants out{};
  out.kappa = constants.kappa;
  if (!(out.kappa > 0.0 && out.kappa <= 1.0)) throw std::domain_error("kappa must lie in (0, 1]");
  if (constants.epsilon) {
    out.epsilon = *constants.epsilon;
    if (!(out.epsilon > 0.0 && out.epsilon <= 1.0)) throw std::domain_error("epsilon must lie in (0, 1]");
  } else {
    // The cached estimate is for kappa = 0.5; other kappas get their own run.
    out.epsilon = out.kappa == 0.5 ? default_small_ball(design).epsilon
                                   : small_ball_estimate(design, out.kappa, 100000, 0x5b411ULL).epsilon;
  }
  out.theta = out.kappa * out.kappa * out.epsilon / 16.0;
  out.c_Q = constants.c_Q.value_or(out.kappa * out.epsilon / 32.0);
  out.c_M = constants.c_M.value_or(out.theta / 10.0);
  if (!(out.c_Q > 0.0) || !(out.c_M > 0.0)) throw std::domain_error("c_Q and c_M must be positive");
  return out;
}

namespace {

// Smallest r > 0 with holds(r), assuming holds is monotone (false then true).
// Returns 0 when holds(r) is true for every representable r > 0.
double smallest_radius(const std::function<bool(double)>& holds, double start, const std::string& what) {
  double hi = start;
  int steps = 0;
  while (!holds(hi)) {
    hi *= 2.0;
    if (++steps > 1100 || !std::isfinite(hi)) throw std::runtime_error(what + ": no radius satisfies the fixed-point inequality");
  }
  double lo = hi * 0.5;
  steps = 0;
  while (holds(lo)) {
    lo *= 0.5;
    if (++steps > 1100 || lo == 0.0) return 0.0;
  }
  for (int i = 0; i < 300 && hi / lo - 1.0 > 1e-14; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (holds(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

}  // namespace

RateReport rate_fixed_point(const RegNorm& norm, const DesignModel& design, const NoiseModel& noise, Index N,
                            double delta, double rho, const RateConstants& constants) {
  if (N < 1) throw std::invalid_argument("rate_fixed_point needs N >= 1");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::domain_error("rate_fixed_point needs rho > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("confidence delta must lie in (0, 1)");
  if (!(constants.c_L > 0.0)) throw std::domain_error("c_L must be positive");
  const ResolvedConstants rc = resolve_constants(design, constants);

  RateReport rep;
  rep.rho = rho;
  rep.N = N;
  rep.delta = delta;
  rep.kappa = rc.kappa;
  rep.epsilon = rc.epsilon;
  rep.theta = rc.theta;
  rep.c_Q = rc.c_Q;
  rep.c_M = rc.c_M;
  rep.lq_norm = noise.lq_norm();

  const double sqrtN = std::sqrt(static_cast<double>(N));
  auto width = [&](double r) { return width_closed_form(norm, rho, r, design, constants.width); };
  auto context = [&](const char* level) {
    std::ostringstream os;
    os << level << " (norm=" << to_string(norm.kind()) << ", dim=" << norm.dim() << ", N=" << N << ", rho=" << rho
       << ")";
    return os.str();
  };

  if (static_cast<double>(N) >= constants.c_L * static_cast<double>(norm.dim())) {
    rep.r_Q = 0.0;
  } else {
    rep.r_Q = smallest_radius(
        [&](double r) { return constants.c_quadratic * width(r) <= rc.c_Q * r * sqrtN; }, rho, context("r_Q"));
  }

  if (rep.lq_norm == 0.0) {
    rep.r_M = 0.0;
  } else {
    const double scale = constants.c_multiplier * rep.lq_norm;
    rep.r_M = smallest_radius([&](double r) { return scale * width(r) <= rc.c_M * r * r * sqrtN; }, rho,
                              context("r_M"));
  }

  rep.r = std::max(rep.r_Q, rep.r_M);
  rep.gamma_O_bound = rep.theta * rep.r * rep.r / 8.0;
  return rep;
}

ClosedFormRates rate_closed_form(const RegNorm& norm, const DesignModel& design, double lq, Index N, double rho,
                                 double c_L) {
  if (N < 1 || !(rho > 0.0) || !(lq >= 0.0)) throw std::domain_error("rate_closed_form: invalid arguments");
  const double n = static_cast<double>(N);
  const double d = static_cast<double>(norm.dim());
  const bool small_n = n < c_L * d;
  ClosedFormRates out;

  if (!design.isotropic()) {
    if (norm.kind() != NormKind::L1) throw std::invalid_argument("rate_closed_form: only l1 has a correlated-design display");
    const double sigma = design.row_bound();
    out.r_M2 = std::min(lq * lq * d / n, rho * sigma * lq * std::sqrt(std::log(M_E * d) / n));
    out.r_Q2 = small_n ? rho * rho * sigma * sigma / n * std::log(M_E * d / n) : 0.0;
    return out;
  }

  switch (norm.kind()) {
    case NormKind::L1:
      if (rho * rho * n >= lq * lq * d * d) out.r_M2 = lq * lq * d / n;
      else out.r_M2 = rho * lq * std::sqrt(std::log(M_E * lq * d / (rho * std::sqrt(n))) / n);
      out.r_Q2 = small_n ? rho * rho / n * std::log(M_E * d / n) : 0.0;
      break;
    case NormKind::Slope:
      if (rho * rho * n >= lq * lq * d * d) out.r_M2 = lq * lq * d / n;
      else out.r_M2 = lq * rho / std::sqrt(n);
      out.r_Q2 = small_n ? rho * rho / n : 0.0;
      break;
    case NormKind::Trace: {
      const double big = static_cast<double>(std::max(norm.rows(), norm.cols()));
      const double small = static_cast<double>(std::min(norm.rows(), norm.cols()));
      if (rho * rho * n >= lq * lq * d * small * small) out.r_M2 = lq * lq * d / n;
      else out.r_M2 = rho * lq * std::sqrt(big / n);
      out.r_Q2 = small_n ? rho * rho * big / n : 0.0;
      break;
    }
  }
  return out;
}

Decomposition empirical_decomposition(const Dataset& data, const Param& t, const Param& t_star) {
  if (data.y.size() != data.N() || t.size() != data.dim() || t_star.size() != data.dim())
    throw ShapeError("empirical_decomposition: shape mismatch");
  const Vector fit = apply_design(data, t);
  const Vector fit_star = apply_design(data, t_star);
  const double n = static_cast<double>(data.N());
  const Vector h = fit - fit_star;
  const Vector xi = fit_star - data.y;
  Decomposition out;
  out.quadratic = h.squaredNorm() / n;
  out.cross = 2.0 * xi.dot(h) / n;
  out.total = ((data.y - fit).squaredNorm() - xi.squaredNorm()) / n;
  return out;
}

}  // namespace smallball
