#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "smallball/sim.hpp"

namespace smallball {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Cell::key() const {
  std::ostringstream os;
  os << "N=" << N << ";shape=" << shape.rows << "x" << shape.cols << ";s=" << s;
  return os.str();
}

std::uint64_t trial_seed(std::uint64_t base, const Cell& cell, int replicate) {
  return splitmix64(base ^ splitmix64(fnv1a(cell.key()) + static_cast<std::uint64_t>(replicate)));
}

void ExperimentSpec::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw std::invalid_argument(key + ": " + why);
  };
  if (N_values.empty()) fail("N", "at least one sample size is required");
  for (Index n : N_values)
    if (n < 1) fail("N", "sample sizes must be >= 1");
  if (shapes.empty()) fail("d", "at least one dimension is required");
  if (s_values.empty()) fail("s", "at least one sparsity level is required");
  if (replications < 1) fail("replications", "must be >= 1");
  if (threads < 1) fail("threads", "must be >= 1");
  if (!(amplitude > 0.0)) fail("amplitude", "must be positive");
  if (!(budget >= 0.0)) fail("budget", "must be >= 0");
  if (lambda && !(*lambda >= 0.0)) fail("lambda", "must be >= 0");
  if (!(slope_constant > 0.0)) fail("slope-c", "must be positive");
  try {
    noise.validate();
  } catch (const std::exception& e) {
    fail("noise", e.what());
  }
  if (!(pipeline.p >= 1.0 && pipeline.p <= 2.0)) fail("p", "must lie in [1, 2]");
  if (!(pipeline.delta > 0.0 && pipeline.delta < 1.0)) fail("delta", "must lie in (0, 1)");
  for (const Shape& sh : shapes) {
    if (sh.rows < 1 || sh.cols < 1) fail("d", "dimensions must be >= 1");
    if (norm != NormKind::Trace && sh.cols != 1) fail("T", "vector norms take a single dimension");
    if (design == DesignKind::CorrelatedGaussian) {
      if (norm == NormKind::Trace) fail("design", "correlated designs are not supported with the trace norm");
      if (covariance && covariance->rows() != sh.rows) fail("covariance", "size differs from d");
    }
    if (slope_weights && norm == NormKind::Slope && slope_weights->size() != sh.rows)
      fail("weights", "length differs from d");
    const Index cap = std::min(sh.rows, sh.cols == 1 ? sh.rows : sh.cols);
    for (Index s : s_values)
      if (s < 1 || s > cap) fail("s", "sparsity " + std::to_string(s) + " is outside [1, " + std::to_string(cap) + "]");
  }
}

RegNorm build_norm(const ExperimentSpec& spec, Shape shape) {
  switch (spec.norm) {
    case NormKind::L1:
      return RegNorm::l1(shape.rows);
    case NormKind::Slope:
      if (spec.slope_weights) return RegNorm::slope(*spec.slope_weights, spec.slope_constant);
      return RegNorm::slope_generated(shape.rows, spec.slope_constant);
    case NormKind::Trace:
      return RegNorm::trace(shape.rows, shape.cols);
  }
  throw std::invalid_argument("unknown norm");
}

DesignModel build_design(const ExperimentSpec& spec, Shape shape) {
  switch (spec.design) {
    case DesignKind::IsotropicGaussian:
      return DesignModel::isotropic_gaussian(shape.rows, shape.cols);
    case DesignKind::Rademacher:
      return DesignModel::rademacher(shape.rows, shape.cols);
    case DesignKind::CorrelatedGaussian:
      return DesignModel::correlated_gaussian(spec.covariance ? *spec.covariance
                                                              : toeplitz_covariance(shape.rows, spec.toeplitz));
  }
  throw std::invalid_argument("unknown design");
}

std::vector<Cell> experiment_cells(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  for (const Shape& sh : spec.shapes)
    for (Index s : spec.s_values)
      for (Index n : spec.N_values) cells.push_back({n, sh, s});
  return cells;
}

namespace {

struct CellPlan {
  std::optional<RegNorm> norm;
  std::optional<DesignModel> design;
  std::optional<LambdaChoice> choice;
  std::string error;
};

TrialRecord run_one(const ExperimentSpec& spec, const Cell& cell, const CellPlan& plan, int rep) {
  TrialRecord rec;
  rec.cell = cell;
  rec.replicate = rep;
  rec.seed = trial_seed(spec.seed, cell, rep);
  if (!plan.error.empty()) {
    rec.message = plan.error;
    return rec;
  }
  try {
    const TargetSpec target = make_target(*plan.norm, cell.s, spec.amplitude, spec.budget, splitmix64(rec.seed ^ 1));
    const LambdaChoice* choice = plan.choice ? &*plan.choice : nullptr;
    rec.errors = run_trial(*plan.norm, *plan.design, spec.noise, target, cell.N, spec.lambda,
                           splitmix64(rec.seed ^ 2), spec.pipeline, choice);
    rec.ok = true;
  } catch (const std::exception& e) {
    rec.message = e.what();
  }
  return rec;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, const RecordSink& sink) {
  spec.validate();
  ExperimentResult result;
  result.cells = experiment_cells(spec);
  const std::size_t n_cells = result.cells.size();
  const std::size_t reps = static_cast<std::size_t>(spec.replications);
  const std::size_t total = n_cells * reps;

  std::vector<CellPlan> plans(n_cells);
  for (std::size_t c = 0; c < n_cells; ++c) {
    const Cell& cell = result.cells[c];
    try {
      plans[c].norm = build_norm(spec, cell.shape);
      plans[c].design = build_design(spec, cell.shape);
      if (!spec.lambda)
        plans[c].choice = auto_lambda(*plans[c].norm, *plans[c].design, spec.noise, cell.s, cell.N, spec.pipeline);
    } catch (const std::exception& e) {
      plans[c].error = std::string("cell ") + cell.key() + ": " + e.what();
    }
  }

  result.records.resize(total);
  std::vector<char> done(total, 0);
  std::size_t emitted = 0;
  std::mutex mutex;
  std::exception_ptr sink_error;
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= total) return;
      TrialRecord rec = run_one(spec, result.cells[idx / reps], plans[idx / reps], static_cast<int>(idx % reps));
      std::lock_guard<std::mutex> lock(mutex);
      result.records[idx] = std::move(rec);
      done[idx] = 1;
      while (emitted < total && done[emitted]) {
        if (sink && !sink_error) {
          try {
            sink(result.records[emitted]);
          } catch (...) {
            sink_error = std::current_exception();
          }
        }
        ++emitted;
      }
    }
  };

  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(spec.threads), std::max<std::size_t>(total, 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (sink_error) std::rethrow_exception(sink_error);
  return result;
}

}  // namespace smallball
