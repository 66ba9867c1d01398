#include "smallball/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "smallball/io.hpp"

namespace smallball {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Bound {
  double lower = -kInf;
  bool strict = false;
  double upper = kInf;
  bool upper_strict = false;
};

struct Entry {
  KeySpec spec;
  Bound bound;
};

std::vector<Entry> make_registry() {
  using VT = ValueType;
  auto num = [](std::string name, VT type, std::string def, std::string help, Bound b = {}) {
    return Entry{KeySpec{std::move(name), type, std::move(def), std::move(help), {}}, b};
  };
  auto choice = [](std::string name, std::string def, std::vector<std::string> options, std::string help) {
    return Entry{KeySpec{std::move(name), VT::Choice, std::move(def), std::move(help), std::move(options)}, {}};
  };
  return {
      choice("norm", "l1", {"l1", "slope", "trace"}, "regularizer"),
      num("slope-c", VT::Double, "1", "SLOPE weight constant C", {0.0, true}),
      num("weights", VT::String, "", "CSV file of SLOPE weights (default: generated)"),
      choice("design", "gaussian", {"gaussian", "rademacher", "correlated"}, "distribution of the rows X_i"),
      num("d", VT::IntList, "16", "dimension(s); the row count m for the trace norm", {1.0}),
      num("T", VT::Int, "0", "column count for the trace norm (0: square)", {0.0}),
      num("sigma", VT::String, "", "CSV file with the covariance of a correlated design"),
      num("toeplitz", VT::Double, "0.5", "a in Sigma_ij = a^|i-j| when no covariance file is given", {-1.0, true, 1.0, true}),
      choice("noise", "gaussian", {"gaussian", "student-t"}, "noise distribution"),
      num("noise-scale", VT::Double, "1", "noise scale", {0.0}),
      num("dof", VT::Double, "3", "Student-t degrees of freedom", {0.0, true}),
      num("q", VT::Double, "2.5", "noise integrability exponent q > 2", {2.0, true}),
      num("s", VT::IntList, "1", "sparsity or rank level(s)", {1.0}),
      num("amplitude", VT::Double, "1", "magnitude of the nonzero entries / singular values", {0.0, true}),
      num("budget", VT::Double, "0", "Psi(u) of the target perturbation", {0.0}),
      num("N", VT::IntList, "100", "sample size(s)", {1.0}),
      num("replications", VT::Int, "1", "replicates per cell", {1.0}),
      num("seed", VT::Seed, "0", "base seed (default: $SMALLBALL_SEED, else 0)"),
      num("delta", VT::Double, "0.05", "confidence parameter", {0.0, true, 1.0, true}),
      num("kappa", VT::Double, "0.5", "small-ball level kappa", {0.0, true, 1.0}),
      num("epsilon", VT::OptionalDouble, "", "small-ball probability (default: Monte Carlo estimate)", {0.0, true, 1.0}),
      num("c-Q", VT::OptionalDouble, "", "quadratic fixed-point constant (default kappa*epsilon/32)", {0.0, true}),
      num("c-M", VT::OptionalDouble, "", "multiplier fixed-point constant (default theta/10)", {0.0, true}),
      num("c-L", VT::Double, "2", "r_Q = 0 once N >= c-L * dim", {0.0, true}),
      num("c-quad", VT::Double, "1", "width multiplier in the quadratic fixed point", {0.0, true}),
      num("c-mult", VT::Double, "1", "width multiplier in the multiplier fixed point", {0.0, true}),
      num("width-l1", VT::Double, "1.4142135623730951", "constant of the l1 width bound", {0.0, true}),
      num("width-slope", VT::Double, "1.4142135623730951", "constant of the SLOPE width bound", {0.0, true}),
      num("width-trace", VT::Double, "2", "constant of the operator-norm branch of the trace width bound",
          {0.0, true}),
      num("lemma-l1", VT::Double, "100", "l1 sparsity-condition constant", {0.0, true}),
      num("lemma-slope", VT::Double, "40", "SLOPE sparsity-condition constant", {0.0, true}),
      num("lemma-trace", VT::Double, "400", "trace sparsity-condition constant", {0.0, true}),
      num("lemma-slope-noniso", VT::Double, "80", "correlated SLOPE sparsity-condition constant", {0.0, true}),
      num("lemma-l1-noniso", VT::Double, "20", "correlated l1 sparsity-condition constant", {0.0, true}),
      num("lambda", VT::OptionalDouble, "", "fixed regularization parameter (default: theory-driven)", {0.0}),
      choice("lambda-rule", "midpoint", {"midpoint", "lower", "explicit"},
             "point of the lambda window; 'explicit' checks --lambda against the window"),
      num("tol", VT::Double, "1e-08", "solver tolerance", {0.0, true}),
      num("max-iter", VT::Int, "20000", "solver iteration cap", {1.0}),
      num("p", VT::Double, "1.5", "exponent of the recorded l_p error", {1.0, false, 2.0}),
      num("rho", VT::OptionalDouble, "", "radius rho (default: rho*)", {0.0, true}),
      num("r", VT::OptionalDouble, "", "radius r (default: r(rho))", {0.0, true}),
      num("trials", VT::Int, "10000", "Monte Carlo trials for widths", {100.0}),
      num("samples", VT::Int, "100000", "oracle / small-ball sample budget", {1.0}),
      num("t-star", VT::DoubleList, "", "comma-separated target for the oracle"),
      num("data", VT::String, "", "CSV with columns y,x1..xd for solve (default: synthetic)"),
      num("output", VT::String, "", "output CSV path (default: stdout)"),
      num("threads", VT::Int, "1", "worker cap", {1.0}),
      choice("predictor", "N", {"N", "s", "d", "maxmt"}, "predictor of the scaling fit"),
      choice("statistic", "l2sq", {"l2sq", "l2", "l1", "lp", "psi", "metricsq", "metric"},
             "response of the scaling fit"),
  };
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r = make_registry();
  return r;
}

const Entry& entry(const std::string& name) {
  for (const Entry& e : registry())
    if (e.spec.name == name) return e;
  throw ConfigError(name, "unknown key");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

long long parse_int(const std::string& name, const std::string& text) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(name, "expected an integer, got '" + text + "'");
  return v;
}

double parse_num(const std::string& name, const std::string& text) {
  double v = 0.0;
  try {
    v = io::parse_double(text);
  } catch (const std::exception&) {
    throw ConfigError(name, "expected a number, got '" + text + "'");
  }
  if (!std::isfinite(v)) throw ConfigError(name, "value must be finite");
  return v;
}

void check_bound(const Entry& e, double v) {
  const Bound& b = e.bound;
  const bool low_ok = b.strict ? v > b.lower : v >= b.lower;
  const bool high_ok = b.upper_strict ? v < b.upper : v <= b.upper;
  if (!low_ok || !high_ok) {
    std::ostringstream os;
    os << "value " << v << " is out of range";
    throw ConfigError(e.spec.name, os.str());
  }
}

void validate_value(const Entry& e, const std::string& value) {
  const std::string& name = e.spec.name;
  if (value.find('\n') != std::string::npos) throw ConfigError(name, "value may not contain a newline");
  switch (e.spec.type) {
    case ValueType::String:
      return;
    case ValueType::Choice:
      for (const auto& c : e.spec.choices)
        if (c == value) return;
      throw ConfigError(name, "'" + value + "' is not one of the accepted values");
    case ValueType::Double:
      check_bound(e, parse_num(name, value));
      return;
    case ValueType::OptionalDouble:
      if (!value.empty()) check_bound(e, parse_num(name, value));
      return;
    case ValueType::Int:
      check_bound(e, static_cast<double>(parse_int(name, value)));
      return;
    case ValueType::IntList: {
      const auto items = split_list(value);
      if (items.empty()) throw ConfigError(name, "list must not be empty");
      for (const auto& it : items) check_bound(e, static_cast<double>(parse_int(name, it)));
      return;
    }
    case ValueType::DoubleList:
      if (!value.empty())
        for (const auto& it : split_list(value)) parse_num(name, it);
      return;
    case ValueType::Seed: {
      std::uint64_t v = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (value.empty() || ec != std::errc() || ptr != value.data() + value.size())
        throw ConfigError(name, "expected an unsigned 64-bit integer, got '" + value + "'");
      return;
    }
  }
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> cmds = {"solve", "rates", "widths", "sparsity", "experiment", "oracle"};
  return cmds;
}

const std::vector<KeySpec>& RunConfig::keys() {
  static const std::vector<KeySpec> specs = [] {
    std::vector<KeySpec> out;
    for (const Entry& e : registry()) out.push_back(e.spec);
    return out;
  }();
  return specs;
}

const KeySpec& RunConfig::key(const std::string& name) { return entry(name).spec; }

RunConfig RunConfig::defaults(const std::string& command) {
  bool known = false;
  for (const auto& c : subcommands()) known = known || c == command;
  if (!known) throw ConfigError("command", "unknown subcommand '" + command + "'");
  RunConfig cfg;
  cfg.command_ = command;
  for (const Entry& e : registry()) cfg.values_[e.spec.name] = e.spec.default_value;
  if (const char* env = std::getenv("SMALLBALL_SEED"); env != nullptr && *env != '\0') {
    try {
      cfg.set("seed", trim(env));
    } catch (const ConfigError&) {
      throw ConfigError("SMALLBALL_SEED", std::string("expected an unsigned 64-bit integer, got '") + env + "'");
    }
  }
  return cfg;
}

void RunConfig::set(const std::string& name, const std::string& value) {
  const Entry& e = entry(name);
  const std::string v = trim(value);
  validate_value(e, v);
  values_[name] = v;
}

void RunConfig::apply_file_text(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config", "line " + std::to_string(lineno) + " is not of the form key = value");
    const std::string k = trim(t.substr(0, eq));
    const std::string v = trim(t.substr(eq + 1));
    if (k == "command") {
      if (v != command_) throw ConfigError("command", "file is for '" + v + "', not '" + command_ + "'");
      continue;
    }
    set(k, v);
  }
}

void RunConfig::apply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_file_text(ss.str());
}

const std::string& RunConfig::raw(const std::string& name) const {
  auto it = values_.find(name);
  if (it == values_.end()) throw ConfigError(name, "unknown key");
  return it->second;
}

double RunConfig::get_double(const std::string& name) const { return parse_num(name, raw(name)); }

std::optional<double> RunConfig::get_optional(const std::string& name) const {
  const std::string& v = raw(name);
  if (v.empty()) return std::nullopt;
  return parse_num(name, v);
}

long long RunConfig::get_int(const std::string& name) const { return parse_int(name, raw(name)); }

std::vector<long long> RunConfig::get_int_list(const std::string& name) const {
  std::vector<long long> out;
  for (const auto& it : split_list(raw(name))) out.push_back(parse_int(name, it));
  return out;
}

std::vector<double> RunConfig::get_double_list(const std::string& name) const {
  std::vector<double> out;
  const std::string& v = raw(name);
  if (v.empty()) return out;
  for (const auto& it : split_list(v)) out.push_back(parse_num(name, it));
  return out;
}

std::uint64_t RunConfig::get_seed() const {
  const std::string& v = raw("seed");
  std::uint64_t s = 0;
  std::from_chars(v.data(), v.data() + v.size(), s);
  return s;
}

std::string RunConfig::emit() const {
  std::string out = "command = " + command_ + "\n";
  for (const Entry& e : registry()) out += e.spec.name + " = " + raw(e.spec.name) + "\n";
  return out;
}

RunConfig RunConfig::parse(const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::string command;
  while (std::getline(ss, line)) {
    const std::string t = trim(line);
    if (t.rfind("command", 0) == 0) {
      const auto eq = t.find('=');
      if (eq != std::string::npos && trim(t.substr(0, eq)) == "command") {
        command = trim(t.substr(eq + 1));
        break;
      }
    }
  }
  if (command.empty()) throw ConfigError("command", "missing");
  RunConfig cfg = defaults(command);
  cfg.set("seed", "0");  // the text carries its own seed; ignore the environment
  cfg.apply_file_text(text);
  return cfg;
}

std::string RunConfig::digest() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(emit())));
  return buf;
}

// ---------------------------------------------------------------------------

Shape config_shape(const RunConfig& cfg) {
  const Index rows = static_cast<Index>(cfg.get_int_list("d").front());
  const Index T = static_cast<Index>(cfg.get_int("T"));
  if (cfg.get_string("norm") == "trace") return {rows, T == 0 ? rows : T};
  if (T > 1) throw ConfigError("T", "only the trace norm takes a column count");
  return {rows, 1};
}

RegNorm config_norm(const RunConfig& cfg, Index rows, Index cols) {
  const NormKind kind = parse_norm_kind(cfg.get_string("norm"));
  switch (kind) {
    case NormKind::L1:
      return RegNorm::l1(rows);
    case NormKind::Slope: {
      const double C = cfg.get_double("slope-c");
      const std::string path = cfg.get_string("weights");
      if (path.empty()) return RegNorm::slope_generated(rows, C);
      std::vector<double> flat;
      try {
        for (const auto& row : io::read_numeric_csv(path)) flat.insert(flat.end(), row.begin(), row.end());
      } catch (const std::exception& e) {
        throw ConfigError("weights", e.what());
      }
      if (static_cast<Index>(flat.size()) != rows)
        throw ConfigError("weights", "file has " + std::to_string(flat.size()) + " weights, d is " + std::to_string(rows));
      try {
        return RegNorm::slope(Eigen::Map<Vector>(flat.data(), rows), C);
      } catch (const std::exception& e) {
        throw ConfigError("weights", e.what());
      }
    }
    case NormKind::Trace:
      return RegNorm::trace(rows, cols);
  }
  throw ConfigError("norm", "unknown norm");
}

DesignModel config_design(const RunConfig& cfg, Index rows, Index cols) {
  const DesignKind kind = parse_design_kind(cfg.get_string("design"));
  if (kind == DesignKind::IsotropicGaussian) return DesignModel::isotropic_gaussian(rows, cols);
  if (kind == DesignKind::Rademacher) return DesignModel::rademacher(rows, cols);
  if (cols != 1) throw ConfigError("design", "correlated designs are not supported with the trace norm");
  const std::string path = cfg.get_string("sigma");
  if (path.empty()) return DesignModel::correlated_gaussian(toeplitz_covariance(rows, cfg.get_double("toeplitz")));
  try {
    const auto data = io::read_numeric_csv(path);
    Matrix sigma(static_cast<Index>(data.size()), data.empty() ? 0 : static_cast<Index>(data[0].size()));
    for (Index i = 0; i < sigma.rows(); ++i)
      for (Index j = 0; j < sigma.cols(); ++j)
        sigma(i, j) = data[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (sigma.rows() != rows || sigma.cols() != rows) throw std::invalid_argument("covariance must be d x d");
    return DesignModel::correlated_gaussian(sigma);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("sigma", e.what());
  }
}

NoiseModel config_noise(const RunConfig& cfg) {
  NoiseModel n;
  n.kind = parse_noise_kind(cfg.get_string("noise"));
  n.scale = cfg.get_double("noise-scale");
  n.dof = cfg.get_double("dof");
  n.q = cfg.get_double("q");
  if (n.kind == NoiseKind::StudentT && !(n.dof > n.q))
    throw ConfigError("dof", "Student-t noise needs dof > q for a finite L_q norm");
  n.validate();
  return n;
}

PipelineConfig config_pipeline(const RunConfig& cfg) {
  PipelineConfig p;
  p.delta = cfg.get_double("delta");
  if (!(p.delta < 1.0)) throw ConfigError("delta", "must be below 1");
  p.rates.kappa = cfg.get_double("kappa");
  p.rates.epsilon = cfg.get_optional("epsilon");
  p.rates.c_Q = cfg.get_optional("c-Q");
  p.rates.c_M = cfg.get_optional("c-M");
  p.rates.c_L = cfg.get_double("c-L");
  p.rates.c_quadratic = cfg.get_double("c-quad");
  p.rates.c_multiplier = cfg.get_double("c-mult");
  p.rates.width.l1 = cfg.get_double("width-l1");
  p.rates.width.slope = cfg.get_double("width-slope");
  p.rates.width.trace = cfg.get_double("width-trace");
  p.lemma.l1 = cfg.get_double("lemma-l1");
  p.lemma.slope = cfg.get_double("lemma-slope");
  p.lemma.trace = cfg.get_double("lemma-trace");
  p.lemma.slope_noniso = cfg.get_double("lemma-slope-noniso");
  p.lemma.l1_noniso = cfg.get_double("lemma-l1-noniso");
  p.policy.rule = parse_lambda_rule(cfg.get_string("lambda-rule"));
  if (p.policy.rule == LambdaRule::Explicit) {
    const auto lam = cfg.get_optional("lambda");
    if (!lam) throw ConfigError("lambda", "the explicit lambda rule needs a value");
    p.policy.value = *lam;
  }
  p.solve.tolerance = cfg.get_double("tol");
  p.solve.max_iterations = static_cast<int>(cfg.get_int("max-iter"));
  p.p = cfg.get_double("p");
  return p;
}

ExperimentSpec config_experiment(const RunConfig& cfg) {
  ExperimentSpec spec;
  spec.norm = parse_norm_kind(cfg.get_string("norm"));
  spec.slope_constant = cfg.get_double("slope-c");
  spec.design = parse_design_kind(cfg.get_string("design"));
  spec.toeplitz = cfg.get_double("toeplitz");
  spec.noise = config_noise(cfg);
  for (long long n : cfg.get_int_list("N")) spec.N_values.push_back(static_cast<Index>(n));
  for (long long s : cfg.get_int_list("s")) spec.s_values.push_back(static_cast<Index>(s));
  const Shape first = config_shape(cfg);
  for (long long d : cfg.get_int_list("d")) {
    const Index rows = static_cast<Index>(d);
    spec.shapes.push_back({rows, spec.norm == NormKind::Trace ? (cfg.get_int("T") == 0 ? rows : first.cols) : 1});
  }
  // Files are loaded once; their size is checked against every d.
  if (spec.norm == NormKind::Slope && !cfg.get_string("weights").empty())
    spec.slope_weights = config_norm(cfg, first.rows, 1).weights();
  if (spec.design == DesignKind::CorrelatedGaussian && !cfg.get_string("sigma").empty())
    spec.covariance = config_design(cfg, first.rows, 1).covariance();
  spec.replications = static_cast<int>(cfg.get_int("replications"));
  spec.seed = cfg.get_seed();
  spec.amplitude = cfg.get_double("amplitude");
  spec.budget = cfg.get_double("budget");
  spec.pipeline = config_pipeline(cfg);
  if (spec.pipeline.policy.rule != LambdaRule::Explicit) spec.lambda = cfg.get_optional("lambda");
  spec.threads = static_cast<int>(cfg.get_int("threads"));
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    const auto colon = msg.find(':');
    const std::string k = colon == std::string::npos ? "config" : msg.substr(0, colon);
    throw ConfigError(k, colon == std::string::npos ? msg : trim(msg.substr(colon + 1)));
  }
  return spec;
}

}  // namespace smallball
