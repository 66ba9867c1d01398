#include <algorithm>
#include <cmath>
#include <map>

#include "smallball/sim.hpp"

namespace smallball {

std::string to_string(Predictor p) {
  switch (p) {
    case Predictor::N:
      return "N";
    case Predictor::S:
      return "s";
    case Predictor::D:
      return "d";
    case Predictor::MaxMT:
      return "maxmt";
  }
  return "unknown";
}

std::string to_string(Statistic s) {
  switch (s) {
    case Statistic::L2Squared:
      return "l2sq";
    case Statistic::L2:
      return "l2";
    case Statistic::L1:
      return "l1";
    case Statistic::Lp:
      return "lp";
    case Statistic::Psi:
      return "psi";
    case Statistic::MetricSquared:
      return "metricsq";
    case Statistic::Metric:
      return "metric";
  }
  return "unknown";
}

Predictor parse_predictor(const std::string& name) {
  for (Predictor p : {Predictor::N, Predictor::S, Predictor::D, Predictor::MaxMT})
    if (to_string(p) == name) return p;
  throw std::invalid_argument("unknown predictor '" + name + "'");
}

Statistic parse_statistic(const std::string& name) {
  for (Statistic s : {Statistic::L2Squared, Statistic::L2, Statistic::L1, Statistic::Lp, Statistic::Psi,
                      Statistic::MetricSquared, Statistic::Metric})
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown statistic '" + name + "'");
}

double statistic_value(const ErrorRecord& e, Statistic s) {
  switch (s) {
    case Statistic::L2Squared:
      return e.l2 * e.l2;
    case Statistic::L2:
      return e.l2;
    case Statistic::L1:
      return e.l1;
    case Statistic::Lp:
      return e.lp;
    case Statistic::Psi:
      return e.psi;
    case Statistic::MetricSquared:
      return e.metric * e.metric;
    case Statistic::Metric:
      return e.metric;
  }
  return 0.0;
}

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

namespace {

std::pair<double, double> ols(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, v.size() - 1);
  return v[i] + (pos - static_cast<double>(i)) * (v[j] - v[i]);
}

}  // namespace

ScalingFit fit_scaling(const std::vector<double>& levels, const std::vector<std::vector<double>>& replicates,
                       std::uint64_t seed, int bootstrap) {
  if (levels.size() != replicates.size()) throw std::invalid_argument("fit_scaling: levels and replicates differ in size");
  if (levels.size() < 3) throw std::invalid_argument("fit_scaling needs at least 3 predictor levels");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0)) throw std::domain_error("fit_scaling: predictor levels must be positive");
    if (replicates[i].empty()) throw std::invalid_argument("fit_scaling: a level has no replicates");
    for (std::size_t j = 0; j < i; ++j)
      if (levels[j] == levels[i]) throw std::invalid_argument("fit_scaling: predictor levels must be distinct");
  }

  ScalingFit fit;
  fit.levels = levels;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double m = median(replicates[i]);
    if (!(m > 0.0)) throw std::domain_error("fit_scaling: medians must be positive to take logs");
    fit.medians.push_back(m);
    x.push_back(std::log(levels[i]));
    y.push_back(std::log(m));
  }
  std::tie(fit.slope, fit.intercept) = ols(x, y);

  Rng rng(seed);
  std::vector<double> slopes;
  slopes.reserve(static_cast<std::size_t>(std::max(bootstrap, 0)));
  std::vector<double> yb(levels.size());
  std::vector<double> sample;
  for (int b = 0; b < bootstrap; ++b) {
    bool usable = true;
    for (std::size_t i = 0; i < levels.size(); ++i) {
      const auto& reps = replicates[i];
      std::uniform_int_distribution<std::size_t> pick(0, reps.size() - 1);
      sample.resize(reps.size());
      for (auto& v : sample) v = reps[pick(rng)];
      const double m = median(sample);
      if (!(m > 0.0)) {
        usable = false;
        break;
      }
      yb[i] = std::log(m);
    }
    if (usable) slopes.push_back(ols(x, yb).first);
  }
  if (slopes.empty()) {
    fit.ci_low = fit.ci_high = fit.slope;
  } else {
    std::sort(slopes.begin(), slopes.end());
    fit.ci_low = quantile_sorted(slopes, 0.05);
    fit.ci_high = quantile_sorted(slopes, 0.95);
  }
  return fit;
}

ScalingFit fit_scaling(const ExperimentResult& result, Predictor predictor, Statistic response, std::uint64_t seed,
                       int bootstrap) {
  std::map<double, std::vector<double>> groups;
  for (const TrialRecord& rec : result.records) {
    if (!rec.ok) continue;
    double level = 0.0;
    switch (predictor) {
      case Predictor::N:
        level = static_cast<double>(rec.cell.N);
        break;
      case Predictor::S:
        level = static_cast<double>(rec.cell.s);
        break;
      case Predictor::D:
        level = static_cast<double>(rec.cell.shape.rows * rec.cell.shape.cols);
        break;
      case Predictor::MaxMT:
        level = static_cast<double>(std::max(rec.cell.shape.rows, rec.cell.shape.cols));
        break;
    }
    groups[level].push_back(statistic_value(rec.errors, response));
  }
  std::vector<double> levels;
  std::vector<std::vector<double>> reps;
  for (auto& [level, values] : groups) {
    levels.push_back(level);
    reps.push_back(std::move(values));
  }
  return fit_scaling(levels, reps, seed, bootstrap);
}

}  // namespace smallball
