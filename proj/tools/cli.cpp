#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trustdyn/ensemble.hpp"
#include "trustdyn/errors.hpp"
#include "trustdyn/filter.hpp"
#include "trustdyn/io.hpp"
#include "trustdyn/model.hpp"
#include "trustdyn/sysid.hpp"

namespace trustdyn::cli {

namespace {

BandMode parse_band_mode(const std::string& text) {
  if (text == "minmax") return BandMode{BandKind::MinMax, 0.05};
  const std::string prefix = "percentile:";
  if (text.rfind(prefix, 0) == 0) {
    const std::string value = text.substr(prefix.size());
    try {
      const double p = std::stod(value);
      if (p > 0.0 && p < 0.5) return BandMode{BandKind::Percentile, p};
    } catch (const std::exception&) {
    }
  }
  throw CLI::ValidationError("--band-mode",
                             "expected 'minmax' or 'percentile:<p>' with p in (0, 0.5)");
}

std::string participant_name(int i) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "p%03d", i);
  return buf;
}

ModelParameters resolve_params(const std::optional<std::string>& flag,
                               const Scenario* scenario) {
  if (flag) return load_parameters(*flag);
  if (scenario && scenario->params) return *scenario->params;
  throw ValidationError(
      "no model parameters: pass --params or embed params in the scenario");
}

struct SimulateArgs {
  std::string scenario;
  std::optional<std::string> params;
  std::uint64_t seed = 0;
  int runs = 1;
  std::optional<double> t0;
  double t0_spread = 0.0;
  std::string out;
};

int run_simulate(const SimulateArgs& args) {
  const Scenario scenario = load_scenario(args.scenario);
  const ModelParameters params = resolve_params(args.params, &scenario);
  const double t0 = args.t0.value_or(scenario.initial_trust);

  // per-trial initial trust; identifying the dynamics from a fitted corpus
  // needs dispersion here, so --t0-spread widens the draw around t0
  RandomStream t0_stream(substream_seed(args.seed, 0xA11CEULL));
  const double lo = std::max(1.0, t0 - args.t0_spread);
  const double hi = std::min(100.0, t0 + args.t0_spread);

  std::vector<TrialLog> logs;
  const auto n_trials = scenario.trials.size();
  for (int p = 0; p < args.runs; ++p) {
    for (std::size_t j = 0; j < n_trials; ++j) {
      const std::uint64_t trial_seed = substream_seed(
          args.seed, static_cast<std::uint64_t>(p) * n_trials + j);
      const double trial_t0 =
          args.t0_spread > 0.0 ? t0_stream.uniform(lo, hi) : t0;
      TrialLog log =
          simulate_trial(params, trial_t0, scenario.trials[j], trial_seed, true);
      log.participant_id = participant_name(p);
      log.trial_id = "t" + std::to_string(j);
      logs.push_back(std::move(log));
    }
  }
  write_trial_logs(logs, args.out);

  std::size_t rows = 0;
  for (const auto& log : logs) rows += log.steps.size();
  std::printf("simulate: %d participants x %zu trials (%zu rows) -> %s\n",
              args.runs, n_trials, rows, args.out.c_str());
  return 0;
}

struct EstimateArgs {
  std::string logs;
  std::string params;
  double t0 = 50.0;
  double p0 = 225.0;
  std::string out;
};

int run_estimate(const EstimateArgs& args) {
  const ModelParameters params = load_parameters(args.params);
  const auto logs = load_trial_logs(args.logs);
  const FilterConfig config{args.t0, args.p0};

  std::vector<ResultRow> rows;
  std::size_t steps = 0;
  for (const TrialLog& log : logs) {
    const auto trajectory = filter_trajectory(params, config, log);
    const auto trial_rows = make_result_rows(log, trajectory);
    rows.insert(rows.end(), trial_rows.begin(), trial_rows.end());
    steps += trajectory.size();
  }
  write_results(rows, args.out);
  std::printf("estimate: %zu trials (%zu steps) -> %s\n", logs.size(), steps,
              args.out.c_str());
  return 0;
}

struct EnsembleArgs {
  std::string scenario;
  std::optional<std::string> params;
  int runs = 100;
  std::uint64_t seed = 0;
  double t0 = 50.0;
  double p0 = 225.0;
  std::string band_mode = "minmax";
  bool fixed_record = false;
  int threads = 1;
  std::string out;
};

int run_ensemble_cmd(const EnsembleArgs& args) {
  const Scenario scenario = load_scenario(args.scenario);
  const ModelParameters params = resolve_params(args.params, &scenario);
  const FilterConfig config{args.t0, args.p0};

  std::vector<ResultRow> rows;
  double final_band_width = 0.0;
  for (std::size_t j = 0; j < scenario.trials.size(); ++j) {
    EnsembleOptions options;
    options.n_runs = args.runs;
    options.seed = substream_seed(args.seed, j);
    options.resample_truth = !args.fixed_record;
    options.n_threads = args.threads;
    options.band_mode = parse_band_mode(args.band_mode);
    const EnsembleResult result = run_ensemble(
        params, config, scenario.trials[j], scenario.initial_trust, options);
    final_band_width = result.band_upper.back() - result.band_lower.back();
    const auto trial_rows =
        make_result_rows(scenario.trials[j], result, "t" + std::to_string(j));
    rows.insert(rows.end(), trial_rows.begin(), trial_rows.end());
  }
  write_results(rows, args.out);
  std::printf("ensemble: %d runs x %zu trials, final band width %.6g -> %s\n",
              args.runs, scenario.trials.size(), final_band_width,
              args.out.c_str());
  return 0;
}

struct FitArgs {
  std::string logs;
  std::string out;
};

int run_fit(const FitArgs& args) {
  const auto logs = load_trial_logs(args.logs);
  const FitResult fit = fit_all(logs);
  write_results(fit, args.out);
  std::printf(
      "fit: a=%.6g b=[%.6g, %.6g, %.6g] q=%.6g r=[%.6g, %.6g, %.6g] "
      "(%zu rows) -> %s\n",
      fit.params.a, fit.params.b[0], fit.params.b[1], fit.params.b[2],
      fit.params.q, fit.params.r[0], fit.params.r[1], fit.params.r[2],
      fit.n_observations, args.out.c_str());
  return 0;
}

int run_riccati(const std::string& params_ref) {
  const ModelParameters params = load_parameters(params_ref);
  const double variance = steady_state_variance(params);
  std::printf("riccati: steady-state variance = %.12g\n", variance);
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"simulate, estimate and identify driver-trust dynamics"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand(
      "simulate", "roll the model forward over a scenario into synthetic logs");
  simulate->add_option("--scenario", sim.scenario, "scenario file (JSON)")
      ->required();
  simulate->add_option("--params", sim.params,
                       "parameters: 'table1' or a parameters file");
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--runs", sim.runs, "synthetic participants to generate")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--t0", sim.t0, "override the scenario's initial trust");
  simulate->add_option("--t0-spread", sim.t0_spread,
                       "draw each trial's initial trust uniformly from t0 +/- spread")
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--out", sim.out, "output log file")->required();

  EstimateArgs est;
  auto* estimate = app.add_subcommand(
      "estimate", "replay logs through the trust estimator");
  estimate->add_option("--logs", est.logs, "log file or directory")->required();
  estimate->add_option("--params", est.params, "parameters: 'table1' or a file")
      ->required();
  estimate->add_option("--t0", est.t0, "filter prior mean (default 50)");
  estimate->add_option("--p0", est.p0, "filter prior variance (default 225)")
      ->check(CLI::PositiveNumber);
  estimate->add_option("--out", est.out, "output results file")->required();

  EnsembleArgs ens;
  auto* ensemble = app.add_subcommand(
      "ensemble", "Monte Carlo estimate bands over a scenario");
  ensemble->add_option("--scenario", ens.scenario, "scenario file (JSON)")
      ->required();
  ensemble->add_option("--params", ens.params,
                       "parameters: 'table1' or a parameters file");
  ensemble->add_option("--runs", ens.runs, "number of simulated estimates")
      ->check(CLI::Range(2, 1000000));
  ensemble->add_option("--seed", ens.seed, "random seed");
  ensemble->add_option("--t0", ens.t0, "filter prior mean (default 50)");
  ensemble->add_option("--p0", ens.p0, "filter prior variance (default 225)")
      ->check(CLI::PositiveNumber);
  ensemble->add_option("--band-mode", ens.band_mode,
                       "'minmax' or 'percentile:<p>'");
  ensemble->add_flag("--fixed-record", ens.fixed_record,
                     "share one ground-truth rollout and re-sample only the observations");
  ensemble->add_option("--threads", ens.threads, "worker threads")
      ->check(CLI::PositiveNumber);
  ensemble->add_option("--out", ens.out, "output results file")->required();

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand(
      "fit", "recover model parameters from a log corpus");
  fit_cmd->add_option("--logs", fit.logs, "log file or directory")->required();
  fit_cmd->add_option("--out", fit.out, "output parameters file")->required();

  std::string riccati_params;
  auto* riccati = app.add_subcommand(
      "riccati", "print the filter's steady-state variance");
  riccati->add_option("--params", riccati_params, "parameters: 'table1' or a file")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim);
    if (estimate->parsed()) return run_estimate(est);
    if (ensemble->parsed()) return run_ensemble_cmd(ens);
    if (fit_cmd->parsed()) return run_fit(fit);
    if (riccati->parsed()) return run_riccati(riccati_params);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("trustdyn");
  for (const auto& arg : args) argv.push_back(arg.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace trustdyn::cli
