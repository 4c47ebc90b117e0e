// Command-line front end: simulation, estimation, Monte Carlo drivers and the
// rate-data pipeline. See README.md for usage and exit codes.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tou/errors.hpp"
#include "tou/estimate.hpp"
#include "tou/experiments.hpp"
#include "tou/inference.hpp"
#include "tou/io.hpp"
#include "tou/model.hpp"
#include "tou/simulate.hpp"

namespace {

using nlohmann::json;
using namespace tou;

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kDiverged = 3,
  kNotErgodic = 4,
  kParse = 5,
  kNoCandidate = 6,
  kDegenerate = 7,
};

struct Common {
  std::uint64_t seed = 1;
  std::string out = "-";
  unsigned workers = 0;
};

// Output sink: stdout for "-", a file otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path != "-") {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw std::runtime_error("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void add_param_options(CLI::App* app, ModelParams& p) {
  app->add_option("--r", p.r, "threshold level")->capture_default_str();
  app->add_option("--a-plus", p.a_plus)->capture_default_str();
  app->add_option("--a-minus", p.a_minus)->capture_default_str();
  app->add_option("--b-plus", p.b_plus)->capture_default_str();
  app->add_option("--b-minus", p.b_minus)->capture_default_str();
  app->add_option("--sigma-plus", p.sigma_plus)->capture_default_str();
  app->add_option("--sigma-minus", p.sigma_minus)->capture_default_str();
}

struct SimOptions {
  ModelParams params = reference_params();
  double horizon = 100.0;
  std::size_t steps = 100000;
  double x0 = kReferenceX0;
  bool stationary = false;
  double burn_in = 0.0;
  unsigned substeps = 1;

  SimSpec spec() const {
    SimSpec s;
    s.params = params;
    s.horizon = horizon;
    s.steps = steps;
    s.substeps = substeps;
    if (stationary) {
      s.init = Stationary{};
    } else if (burn_in > 0.0) {
      s.init = BurnIn{x0, burn_in};
    } else {
      s.init = Deterministic{x0};
    }
    return s;
  }
};

void add_sim_options(CLI::App* app, SimOptions& o) {
  add_param_options(app, o.params);
  app->add_option("--T", o.horizon, "time horizon")->capture_default_str();
  app->add_option("--N", o.steps, "number of observation intervals")->capture_default_str();
  app->add_option("--x0", o.x0, "deterministic starting point")->capture_default_str();
  app->add_flag("--stationary", o.stationary, "draw X0 from the stationary law");
  app->add_option("--burn-in", o.burn_in, "discarded Euler run before recording")->capture_default_str();
  app->add_option("--substeps", o.substeps, "Euler steps per observation interval")->capture_default_str();
}

Method parse_method(const std::string& s) {
  if (s == "mle") return Method::MLE;
  if (s == "qmle") return Method::QMLE;
  throw std::invalid_argument("unknown method " + s);
}

void write_json(const std::string& path, const json& j) {
  Sink sink(path);
  sink.stream() << j.dump(2) << '\n';
}

json ks_json(const KsResult& k) { return {{"statistic", k.statistic}, {"p_value", k.p_value}}; }

json matrix_json(const Eigen::Matrix2d& m) { return {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}}; }

// When the primary output goes to stdout the summary goes to stderr, so the
// CSV stream stays parseable.
std::string summary_target(const std::string& summary, const std::string& out) {
  if (!summary.empty()) return summary;
  return out == "-" ? "" : "-";
}

void emit_summary(const std::string& target, const json& j) {
  if (target.empty()) {
    std::cerr << j.dump(2) << '\n';
  } else {
    write_json(target, j);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Threshold Ornstein-Uhlenbeck simulation and estimation"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");

  Common common;
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();
  app.add_option("--out", common.out, "output file, - for stdout")->capture_default_str();
  app.add_option("--workers", common.workers, "worker threads, 0 = hardware concurrency")->capture_default_str();

  // simulate
  auto* sim = app.add_subcommand("simulate", "write simulated trajectories as CSV (t,path_id,x)");
  SimOptions sim_opts;
  std::size_t sim_paths = 1;
  add_sim_options(sim, sim_opts);
  sim->add_option("--paths", sim_paths, "number of independent paths")->capture_default_str();

  // estimate
  auto* est = app.add_subcommand("estimate", "fit drift and volatility; JSON output");
  SimOptions est_sim;
  std::string est_input;
  std::size_t est_path_id = 0;
  std::string est_method = "mle";
  double est_threshold = 0.0;
  ThresholdGrid est_grid;
  double est_p = 0.95;
  bool est_test = false;
  bool est_profile = false;
  add_sim_options(est, est_sim);
  est->add_option("--input", est_input, "trajectory CSV (t,path_id,x); simulates when absent");
  est->add_option("--path-id", est_path_id, "which path of the input to fit")->capture_default_str();
  est->add_option("--method", est_method, "mle or qmle")->check(CLI::IsMember({"mle", "qmle"}))->capture_default_str();
  auto* thr_opt = est->add_option("--threshold", est_threshold, "fixed threshold; skips the grid search");
  est->add_option("--delta", est_grid.delta, "grid spans the delta and 1-delta percentiles")->capture_default_str();
  est->add_option("--grid-points", est_grid.n_points)->capture_default_str();
  est->add_flag("--test", est_test, "also run the no-threshold test");
  est->add_option("--p", est_p, "confidence level of the test")->capture_default_str();
  est->add_flag("--profile", est_profile, "include the score of every candidate threshold");

  // mc-clt
  auto* clt = app.add_subcommand("mc-clt", "Monte Carlo check of the drift CLT");
  McCltConfig clt_cfg;
  std::string clt_summary;
  add_param_options(clt, clt_cfg.params);
  clt->add_option("--T", clt_cfg.horizon)->capture_default_str();
  clt->add_option("--N", clt_cfg.steps)->capture_default_str();
  clt->add_option("--paths", clt_cfg.n_paths)->capture_default_str();
  clt->add_option("--substeps", clt_cfg.substeps)->capture_default_str();
  clt->add_option("--summary", clt_summary, "summary JSON path (default: stdout, or stderr if --out is stdout)");

  // invariant-density
  auto* inv = app.add_subcommand("invariant-density", "terminal values against the stationary law");
  InvariantDensityConfig inv_cfg;
  std::string inv_summary;
  add_param_options(inv, inv_cfg.params);
  inv->add_option("--T", inv_cfg.horizon)->capture_default_str();
  inv->add_option("--N", inv_cfg.steps)->capture_default_str();
  inv->add_option("--paths", inv_cfg.n_paths)->capture_default_str();
  inv->add_option("--x0", inv_cfg.x0)->capture_default_str();
  inv->add_option("--bins", inv_cfg.bins)->capture_default_str();
  inv->add_option("--summary", inv_summary, "summary JSON path");

  // rate-study
  auto* rate = app.add_subcommand("rate-study", "discretization error against a fine reference grid");
  RateStudyConfig rate_cfg;
  std::string rate_summary;
  double rate_x0 = 0.0;
  add_param_options(rate, rate_cfg.params);
  rate->add_option("--T", rate_cfg.horizon)->capture_default_str();
  auto* rate_x0_opt = rate->add_option("--x0", rate_x0, "starting point (default: the threshold)");
  rate->add_option("--min-exp", rate_cfg.min_exponent, "coarsest level 2^k")->capture_default_str();
  rate->add_option("--max-exp", rate_cfg.max_exponent, "finest ladder level 2^k")->capture_default_str();
  rate->add_option("--ref-exp", rate_cfg.ref_exponent, "reference level 2^k")->capture_default_str();
  rate->add_option("--paths", rate_cfg.n_paths)->capture_default_str();
  rate->add_option("--summary", rate_summary, "summary JSON path");

  // rates
  auto* rates = app.add_subcommand("rates", "threshold analysis of a date,value rate series");
  RatesConfig rates_cfg;
  std::string rates_input;
  double rates_dt = kDefaultDtMonths;
  std::string rates_method = "both";
  std::size_t rates_last = 0;
  rates->add_option("--input", rates_input, "CSV with header date,value")->required();
  rates->add_option("--dt", rates_dt, "observation step")->capture_default_str();
  rates->add_option("--delta", rates_cfg.grid.delta)->capture_default_str();
  rates->add_option("--grid-points", rates_cfg.grid.n_points)->capture_default_str();
  rates->add_option("--p", rates_cfg.p)->capture_default_str();
  rates->add_option("--method", rates_method)->check(CLI::IsMember({"mle", "qmle", "both"}))->capture_default_str();
  rates->add_option("--last", rates_last, "use only the last N observations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const SimSpec spec = sim_opts.spec();
      const auto paths = simulate_batch(spec, sim_paths, common.seed, common.workers);
      Sink sink(common.out);
      write_trajectories_csv(sink.stream(), paths);
    } else if (*est) {
      Trajectory traj;
      if (!est_input.empty()) {
        std::ifstream in(est_input);
        if (!in) throw std::runtime_error("cannot open " + est_input);
        auto paths = read_trajectories_csv(in);
        if (est_path_id >= paths.size()) throw std::invalid_argument("--path-id out of range");
        traj = std::move(paths[est_path_id]);
      } else {
        RngStream rng(common.seed, 0);
        traj = simulate(est_sim.spec(), rng);
      }
      const Method method = parse_method(est_method);
      const FitResult fit =
          *thr_opt ? fit_at_threshold(traj, est_threshold, method) : threshold_search(traj, est_grid, method);
      json j = to_json(fit, est_profile);
      if (est_test) j["test"] = to_json(test_threshold(fit, est_p));
      write_json(common.out, j);
    } else if (*clt) {
      clt_cfg.seed = common.seed;
      clt_cfg.workers = common.workers;
      const McCltReport rep = run_mc_clt(clt_cfg);
      {
        Sink sink(common.out);
        auto& os = sink.stream();
        os << "path_id,e_a_plus,e_b_plus,e_a_minus,e_b_minus,z_a_plus,z_b_plus,z_a_minus,z_b_minus\n";
        for (std::size_t i = 0; i < rep.scaled_errors.size(); ++i) {
          os << rep.path_ids[i];
          for (double v : rep.scaled_errors[i]) os << ',' << format_double(v);
          for (double v : rep.standardized[i]) os << ',' << format_double(v);
          os << '\n';
        }
      }
      const char* names[] = {"a_plus", "b_plus", "a_minus", "b_minus"};
      json ks;
      for (int k = 0; k < 4; ++k) ks[names[k]] = ks_json(rep.ks[k]);
      emit_summary(summary_target(clt_summary, common.out),
                   {{"schema", "tou.mc_clt/1"},
                    {"params", to_json(clt_cfg.params)},
                    {"T", clt_cfg.horizon},
                    {"N", clt_cfg.steps},
                    {"paths", clt_cfg.n_paths},
                    {"seed", clt_cfg.seed},
                    {"degenerate_paths", rep.degenerate_paths},
                    {"theory_cov_plus", matrix_json(rep.theory_cov_plus)},
                    {"theory_cov_minus", matrix_json(rep.theory_cov_minus)},
                    {"empirical_cov_plus", matrix_json(rep.empirical_cov_plus)},
                    {"empirical_cov_minus", matrix_json(rep.empirical_cov_minus)},
                    {"cov_rel_error", rep.cov_rel_error},
                    {"ks", ks}});
    } else if (*inv) {
      inv_cfg.seed = common.seed;
      inv_cfg.workers = common.workers;
      const InvariantDensityReport rep = run_invariant_density(inv_cfg);
      {
        Sink sink(common.out);
        auto& os = sink.stream();
        os << "bin_lo,bin_hi,x,theoretical,empirical\n";
        for (const auto& b : rep.histogram) {
          os << format_double(b.lo) << ',' << format_double(b.hi) << ',' << format_double(0.5 * (b.lo + b.hi))
             << ',' << format_double(b.theoretical) << ',' << format_double(b.empirical) << '\n';
        }
      }
      emit_summary(summary_target(inv_summary, common.out),
                   {{"schema", "tou.invariant_density/1"},
                    {"params", to_json(inv_cfg.params)},
                    {"T", inv_cfg.horizon},
                    {"N", inv_cfg.steps},
                    {"paths", inv_cfg.n_paths},
                    {"seed", inv_cfg.seed},
                    {"ks", ks_json(rep.ks)},
                    {"modes", rep.modes}});
    } else if (*rate) {
      rate_cfg.seed = common.seed;
      rate_cfg.workers = common.workers;
      if (*rate_x0_opt) rate_cfg.x0 = rate_x0;
      const RateStudyReport rep = run_rate_study(rate_cfg);
      {
        Sink sink(common.out);
        auto& os = sink.stream();
        os << "N,mean_abs_estimator_gap,mean_abs_local_time_gap\n";
        for (const auto& row : rep.rows) {
          os << row.n << ',' << format_double(row.estimator_gap) << ',' << format_double(row.local_time_gap) << '\n';
        }
      }
      emit_summary(summary_target(rate_summary, common.out),
                   {{"schema", "tou.rate_study/1"},
                    {"params", to_json(rate_cfg.params)},
                    {"T", rate_cfg.horizon},
                    {"paths", rate_cfg.n_paths},
                    {"seed", rate_cfg.seed},
                    {"estimator_paths", rep.estimator_paths},
                    {"estimator_slope", rep.estimator_slope},
                    {"local_time_slope", rep.local_time_slope}});
    } else if (*rates) {
      RateParseResult data = load_rate_series(rates_input);
      data.series.dt_months = rates_dt;
      if (data.dropped > 0) std::cerr << "warning: dropped " << data.dropped << " rows with missing values\n";
      if (rates_last > 0) rates_cfg.last_rows = rates_last;
      if (rates_method != "both") rates_cfg.methods = {parse_method(rates_method)};
      write_json(common.out, run_rates(data, rates_cfg));
    }
  } catch (const Diverged& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const NotErgodic& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNotErgodic;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const NoValidCandidate& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNoCandidate;
  } catch (const DegenerateSide& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}
