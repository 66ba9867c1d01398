// Command-line front end: one subcommand per pipeline stage, results as CSV.
//
// Exit status: 0 success, 2 invalid configuration (the offending key is
// named), 3 numerical failure (the failing cell is named).

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "smallball/config.hpp"
#include "smallball/io.hpp"
#include "smallball/kernels.hpp"
#include "smallball/prox.hpp"
#include "smallball/rates.hpp"
#include "smallball/sim.hpp"
#include "smallball/solver.hpp"
#include "smallball/sparsity.hpp"

#ifndef SMALLBALL_VERSION
#define SMALLBALL_VERSION "dev"
#endif

namespace sb = smallball;
using sb::io::format_double;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

// Failure inside a named unit of work.
struct CellFailure : std::runtime_error {
  CellFailure(const std::string& cell, const std::string& what) : std::runtime_error("cell " + cell + ": " + what) {}
};

sb::io::Metadata metadata(const sb::RunConfig& cfg) {
  sb::io::Metadata md = {{"version", SMALLBALL_VERSION},
                         {"command", cfg.command()},
                         {"seed", std::to_string(cfg.get_seed())},
                         {"config_digest", cfg.digest()}};
  for (const auto& k : sb::RunConfig::keys()) md.emplace_back("config." + k.name, cfg.raw(k.name));
  return md;
}

std::string fmt_int(long long v) { return std::to_string(v); }

template <typename F>
auto in_cell(const std::string& cell, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const sb::ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw CellFailure(cell, e.what());
  }
}

int cmd_solve(const sb::RunConfig& cfg) {
  const sb::Shape shape = sb::config_shape(cfg);
  const sb::RegNorm norm = sb::config_norm(cfg, shape.rows, shape.cols);
  const sb::DesignModel design = sb::config_design(cfg, shape.rows, shape.cols);
  const sb::NoiseModel noise = sb::config_noise(cfg);
  const sb::PipelineConfig pipe = sb::config_pipeline(cfg);
  const auto N = static_cast<sb::Index>(cfg.get_int_list("N").front());
  const auto s = static_cast<sb::Index>(cfg.get_int_list("s").front());
  const std::uint64_t seed = cfg.get_seed();

  sb::Dataset data;
  std::optional<sb::Param> truth;
  const std::string path = cfg.get_string("data");
  if (!path.empty()) {
    sb::io::CsvTable table;
    try {
      table = sb::io::read_csv(path);
    } catch (const std::exception& e) {
      throw sb::ConfigError("data", e.what());
    }
    if (table.header.empty() || table.header[0] != "y") throw sb::ConfigError("data", "first column must be 'y'");
    if (static_cast<sb::Index>(table.header.size()) - 1 != norm.dim())
      throw sb::ConfigError("data", "file has " + std::to_string(table.header.size() - 1) + " features, expected " +
                                        std::to_string(norm.dim()));
    if (table.rows.empty()) throw sb::ConfigError("data", "file has no samples");
    data.X.resize(static_cast<sb::Index>(table.rows.size()), norm.dim());
    data.y.resize(static_cast<sb::Index>(table.rows.size()));
    try {
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        data.y[static_cast<sb::Index>(i)] = sb::io::parse_double(table.rows[i][0]);
        for (sb::Index j = 0; j < norm.dim(); ++j)
          data.X(static_cast<sb::Index>(i), j) = sb::io::parse_double(table.rows[i][static_cast<std::size_t>(j) + 1]);
      }
    } catch (const std::exception& e) {
      throw sb::ConfigError("data", e.what());
    }
  } else {
    const sb::TargetSpec target =
        sb::make_target(norm, s, cfg.get_double("amplitude"), cfg.get_double("budget"), sb::splitmix64(seed ^ 1));
    data = sb::sample_data(design, noise, target, N, sb::splitmix64(seed ^ 2));
    truth = target.t_star;
  }

  const std::string cell = "solve N=" + std::to_string(data.N()) + " dim=" + std::to_string(norm.dim());
  const auto fixed = cfg.get_optional("lambda");
  const double lambda = in_cell(cell, [&] {
    if (fixed && pipe.policy.rule != sb::LambdaRule::Explicit) return *fixed;
    return sb::auto_lambda(norm, design, noise, s, data.N(), pipe).lambda;
  });
  sb::SolveConfig sc = pipe.solve;
  sc.lambda = lambda;
  const sb::SolveResult res = in_cell(cell, [&] { return sb::fista_solve(data, norm, sc); });
  if (!res.converged) std::cerr << "warning: solver stopped at the iteration cap (kkt=" << res.kkt << ")\n";

  sb::io::Metadata md = metadata(cfg);
  md.emplace_back("lambda", format_double(lambda));
  md.emplace_back("objective", format_double(res.objective));
  md.emplace_back("kkt", format_double(res.kkt));
  md.emplace_back("iterations", fmt_int(res.iterations));
  md.emplace_back("converged", res.converged ? "1" : "0");
  sb::io::CsvWriter out(cfg.get_string("output"), md, {"index", "estimate", "truth"});
  for (sb::Index i = 0; i < norm.dim(); ++i)
    out.write_row({fmt_int(i), format_double(res.estimate[i]), truth ? format_double((*truth)[i]) : ""});
  return 0;
}

int cmd_rates(const sb::RunConfig& cfg) {
  const sb::Shape shape = sb::config_shape(cfg);
  const sb::RegNorm norm = sb::config_norm(cfg, shape.rows, shape.cols);
  const sb::DesignModel design = sb::config_design(cfg, shape.rows, shape.cols);
  const sb::NoiseModel noise = sb::config_noise(cfg);
  const sb::PipelineConfig pipe = sb::config_pipeline(cfg);
  const auto N = static_cast<sb::Index>(cfg.get_int_list("N").front());
  const auto s = static_cast<sb::Index>(cfg.get_int_list("s").front());
  const auto rho = cfg.get_optional("rho");

  const std::string cell = "rates N=" + std::to_string(N) + " dim=" + std::to_string(norm.dim());
  const sb::RateReport rep = in_cell(cell, [&] {
    if (rho) return sb::rate_fixed_point(norm, design, noise, N, pipe.delta, *rho, pipe.rates);
    return sb::rho_star(norm, s, N, design, noise, pipe.delta, pipe.rates, pipe.lemma).report;
  });
  const sb::LambdaWindow win = sb::lambda_window(rep);
  std::string cf_q;
  std::string cf_m;
  try {
    const sb::ClosedFormRates cf = sb::rate_closed_form(norm, design, rep.lq_norm, N, rep.rho, pipe.rates.c_L);
    cf_q = format_double(cf.r_Q2);
    cf_m = format_double(cf.r_M2);
  } catch (const std::invalid_argument&) {
    // No closed-form display for this combination.
  }

  sb::io::CsvWriter out(cfg.get_string("output"), metadata(cfg),
                        {"norm", "dim", "N", "rho", "r_Q", "r_M", "r", "kappa", "epsilon", "theta", "gamma_O_bound",
                         "lambda_lower", "lambda_upper", "lambda_midpoint", "closed_r_Q2", "closed_r_M2"});
  out.write_row({sb::to_string(norm.kind()), fmt_int(norm.dim()), fmt_int(N), format_double(rep.rho),
                 format_double(rep.r_Q), format_double(rep.r_M), format_double(rep.r), format_double(rep.kappa),
                 format_double(rep.epsilon), format_double(rep.theta), format_double(rep.gamma_O_bound),
                 format_double(win.lower), format_double(win.upper),
                 format_double(7.0 * rep.theta * rep.r * rep.r / (16.0 * rep.rho)), cf_q, cf_m});
  return 0;
}

int cmd_widths(const sb::RunConfig& cfg) {
  const sb::Shape shape = sb::config_shape(cfg);
  const sb::RegNorm norm = sb::config_norm(cfg, shape.rows, shape.cols);
  const sb::DesignModel design = sb::config_design(cfg, shape.rows, shape.cols);
  const sb::PipelineConfig pipe = sb::config_pipeline(cfg);
  const auto rho = cfg.get_optional("rho");
  const auto r = cfg.get_optional("r");
  if (!rho) throw sb::ConfigError("rho", "widths needs a value");
  if (!r) throw sb::ConfigError("r", "widths needs a value");
  const auto trials = cfg.get_int("trials");

  const std::string cell = "widths dim=" + std::to_string(norm.dim());
  const double closed = in_cell(cell, [&] { return sb::width_closed_form(norm, *rho, *r, design, pipe.rates.width); });
  const sb::WidthEstimate mc = in_cell(cell, [&] { return sb::width_mc(norm, *rho, *r, design, trials, cfg.get_seed()); });

  sb::io::CsvWriter out(cfg.get_string("output"), metadata(cfg),
                        {"norm", "dim", "rho", "r", "closed_form", "mc_lower", "mc_lower_se", "mc_upper",
                         "mc_upper_se", "trials"});
  out.write_row({sb::to_string(norm.kind()), fmt_int(norm.dim()), format_double(*rho), format_double(*r),
                 format_double(closed), format_double(mc.lower_mean), format_double(mc.lower_se),
                 format_double(mc.upper_mean), format_double(mc.upper_se), fmt_int(mc.trials)});
  return 0;
}

int cmd_sparsity(const sb::RunConfig& cfg) {
  const sb::Shape shape = sb::config_shape(cfg);
  const sb::RegNorm norm = sb::config_norm(cfg, shape.rows, shape.cols);
  const sb::DesignModel design = sb::config_design(cfg, shape.rows, shape.cols);
  const sb::NoiseModel noise = sb::config_noise(cfg);
  const sb::PipelineConfig pipe = sb::config_pipeline(cfg);
  const auto N = static_cast<sb::Index>(cfg.get_int_list("N").front());
  const auto s = static_cast<sb::Index>(cfg.get_int_list("s").front());
  const sb::Regime regime = design.isotropic() ? sb::Regime::Isotropic : sb::Regime::NonIsotropic;

  const std::string cell = "sparsity N=" + std::to_string(N) + " s=" + std::to_string(s);
  const sb::SparsityCheck chk = in_cell(cell, [&] {
    const auto rho = cfg.get_optional("rho");
    if (!rho) return sb::rho_star(norm, s, N, design, noise, pipe.delta, pipe.rates, pipe.lemma).check;
    double r = 0.0;
    if (const auto given = cfg.get_optional("r")) r = *given;
    else r = sb::rate_fixed_point(norm, design, noise, N, pipe.delta, *rho, pipe.rates).r;
    return sb::sparsity_condition(norm, s, *rho, r, regime, pipe.lemma);
  });

  sb::io::CsvWriter out(cfg.get_string("output"), metadata(cfg),
                        {"norm", "regime", "s", "rho", "r", "lhs", "rhs", "satisfied", "delta_lower_bound"});
  out.write_row({sb::to_string(norm.kind()), sb::to_string(regime), fmt_int(s), format_double(chk.rho),
                 format_double(chk.r), format_double(chk.lhs), format_double(chk.rhs), chk.satisfied ? "1" : "0",
                 format_double(chk.delta_lower_bound)});
  return 0;
}

int cmd_oracle(const sb::RunConfig& cfg) {
  const std::vector<double> t = cfg.get_double_list("t-star");
  if (t.empty()) throw sb::ConfigError("t-star", "oracle needs a target");
  const auto d = static_cast<sb::Index>(t.size());
  if (cfg.get_string("norm") == "trace") throw sb::ConfigError("norm", "the oracle supports l1 and slope");
  if (d > 6) throw sb::ConfigError("t-star", "the oracle supports d <= 6");
  const sb::RegNorm norm = sb::config_norm(cfg, d, 1);
  const auto rho = cfg.get_optional("rho");
  const auto r = cfg.get_optional("r");
  if (!rho) throw sb::ConfigError("rho", "oracle needs a value");
  if (!r) throw sb::ConfigError("r", "oracle needs a value");
  const sb::Vector t_star = Eigen::Map<const sb::Vector>(t.data(), d);

  const std::string cell = "oracle d=" + std::to_string(d);
  const sb::DeltaOracleResult res =
      in_cell(cell, [&] { return sb::delta_oracle(norm, t_star, *rho, *r, cfg.get_int("samples"), cfg.get_seed()); });

  sb::io::CsvWriter out(cfg.get_string("output"), metadata(cfg),
                        {"norm", "d", "rho", "r", "delta_hat", "h_empty", "h_samples", "gamma_size", "threshold"});
  out.write_row({sb::to_string(norm.kind()), fmt_int(d), format_double(*rho), format_double(*r),
                 format_double(res.delta), res.h_empty ? "1" : "0", fmt_int(res.h_samples), fmt_int(res.gamma_size),
                 format_double(0.8 * *rho)});
  return 0;
}

std::vector<std::string> record_fields(const sb::TrialRecord& rec) {
  const sb::ErrorRecord& e = rec.errors;
  auto num = [&](double v) { return rec.ok ? format_double(v) : std::string(); };
  return {fmt_int(rec.cell.N),
          fmt_int(rec.cell.shape.rows),
          fmt_int(rec.cell.shape.cols),
          fmt_int(rec.cell.s),
          fmt_int(rec.replicate),
          std::to_string(rec.seed),
          rec.ok ? "1" : "0",
          num(e.l1),
          num(e.l2),
          num(e.lp),
          num(e.p),
          num(e.psi),
          num(e.metric),
          num(e.lambda),
          num(e.rho_star),
          num(e.r),
          rec.ok ? (e.converged ? "1" : "0") : "",
          num(e.kkt),
          rec.ok ? fmt_int(e.iterations) : "",
          num(e.objective),
          rec.message};
}

int cmd_experiment(const sb::RunConfig& cfg) {
  const sb::ExperimentSpec spec = sb::config_experiment(cfg);
  sb::io::CsvWriter out(cfg.get_string("output"), metadata(cfg),
                        {"N", "rows", "cols", "s", "replicate", "seed", "ok", "l1", "l2", "lp", "p", "psi",
                         "metric", "lambda", "rho_star", "r", "converged", "kkt", "iterations", "objective",
                         "message"});
  const sb::ExperimentResult result =
      sb::run_experiment(spec, [&](const sb::TrialRecord& rec) { out.write_row(record_fields(rec)); });

  std::ostream& info = cfg.get_string("output").empty() ? std::cerr : std::cout;
  const sb::Predictor predictor = sb::parse_predictor(cfg.get_string("predictor"));
  const sb::Statistic statistic = sb::parse_statistic(cfg.get_string("statistic"));
  try {
    const sb::ScalingFit fit = sb::fit_scaling(result, predictor, statistic);
    info << "fit " << sb::to_string(statistic) << " ~ " << sb::to_string(predictor) << "^slope: slope=" << fit.slope
         << " ci90=[" << fit.ci_low << ", " << fit.ci_high << "]\n";
  } catch (const std::exception& e) {
    info << "fit skipped: " << e.what() << "\n";
  }

  for (const auto& rec : result.records)
    if (!rec.ok) throw CellFailure(rec.cell.key() + " replicate " + std::to_string(rec.replicate), rec.message);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparsity-driven regularized least squares: solver, rate theory and simulation"};
  app.set_version_flag("--version", std::string(SMALLBALL_VERSION) + " (" +
                                        std::string(sb::kernels::isa_name(sb::kernels::active_isa())) + ")");
  app.require_subcommand(1);

  const std::map<std::string, std::string> about = {
      {"solve", "fit one estimator on a CSV dataset or a synthetic sample"},
      {"rates", "critical levels r_Q, r_M and the lambda window"},
      {"widths", "closed-form and Monte Carlo Gaussian mean width"},
      {"sparsity", "sufficient sparsity condition at rho (default rho*)"},
      {"experiment", "seeded Monte Carlo sweep with per-trial CSV output"},
      {"oracle", "brute-force Delta(rho) estimate for d <= 6"},
  };

  struct Parsed {
    CLI::App* sub;
    std::string config_path;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::map<std::string, Parsed> parsed;
  for (const auto& name : sb::subcommands()) {
    Parsed& p = parsed[name];
    p.sub = app.add_subcommand(name, about.at(name));
    p.sub->add_option("--config", p.config_path, "key = value file; flags override it");
    for (const auto& key : sb::RunConfig::keys()) {
      std::string help = key.help;
      if (!key.default_value.empty()) help += " [" + key.default_value + "]";
      p.options[key.name] = p.sub->add_option("--" + key.name, p.values[key.name], help);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  for (auto& [name, p] : parsed) {
    if (!p.sub->parsed()) continue;
    sb::RunConfig cfg;
    try {
      cfg = sb::RunConfig::defaults(name);
      if (!p.config_path.empty()) cfg.apply_file(p.config_path);
      for (const auto& key : sb::RunConfig::keys())
        if (p.options[key.name]->count() > 0) cfg.set(key.name, p.values[key.name]);

      if (name == "solve") return cmd_solve(cfg);
      if (name == "rates") return cmd_rates(cfg);
      if (name == "widths") return cmd_widths(cfg);
      if (name == "sparsity") return cmd_sparsity(cfg);
      if (name == "experiment") return cmd_experiment(cfg);
      if (name == "oracle") return cmd_oracle(cfg);
    } catch (const sb::ConfigError& e) {
      std::cerr << "error: invalid configuration: " << e.what() << "\n";
      return kExitConfig;
    } catch (const CellFailure& e) {
      std::cerr << "error: numerical failure in " << e.what() << "\n";
      return kExitNumeric;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: invalid configuration: " << e.what() << "\n";
      return kExitConfig;
    } catch (const std::exception& e) {
      std::cerr << "error: numerical failure in " << name << ": " << e.what() << "\n";
      return kExitNumeric;
    }
  }
  return 0;
}
