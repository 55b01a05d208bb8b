#include "trustdyn/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace trustdyn {

namespace {

std::vector<double> means_of(const std::vector<FilterState>& states) {
  std::vector<double> out(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) out[i] = states[i].mean;
  return out;
}

// Linear interpolation between order statistics, matching the usual
// "linear" quantile definition.
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

Bands compute_bands(const std::vector<std::vector<double>>& runs,
                    const BandMode& mode) {
  if (runs.empty()) {
    throw std::invalid_argument("compute_bands requires at least one run");
  }
  const std::size_t n_steps = runs.front().size();
  for (const auto& run : runs) {
    if (run.size() != n_steps) {
      throw std::invalid_argument("compute_bands requires equal-length runs");
    }
  }
  if (mode.kind == BandKind::Percentile &&
      !(mode.percentile > 0.0 && mode.percentile < 0.5)) {
    throw std::invalid_argument("band percentile must lie in (0, 0.5)");
  }

  Bands bands;
  bands.lower.resize(n_steps);
  bands.upper.resize(n_steps);
  std::vector<double> column(runs.size());
  for (std::size_t t = 0; t < n_steps; ++t) {
    for (std::size_t i = 0; i < runs.size(); ++i) column[i] = runs[i][t];
    if (mode.kind == BandKind::MinMax) {
      auto [lo, hi] = std::minmax_element(column.begin(), column.end());
      bands.lower[t] = *lo;
      bands.upper[t] = *hi;
    } else {
      std::sort(column.begin(), column.end());
      bands.lower[t] = quantile_sorted(column, mode.percentile);
      bands.upper[t] = quantile_sorted(column, 1.0 - mode.percentile);
    }
  }
  return bands;
}

EnsembleResult run_ensemble(const ModelParameters& params,
                            const FilterConfig& config,
                            std::span<const EventKind> events,
                            double truth_initial, const EnsembleOptions& options) {
  params.validate_for_estimation();
  config.validate();
  if (options.n_runs < 2) {
    throw std::invalid_argument("run_ensemble requires n_runs >= 2");
  }
  if (events.empty()) {
    throw std::invalid_argument("run_ensemble requires a nonempty event list");
  }

  EnsembleResult result;

  // noise-free reference replay
  const SimulatedTrial reference =
      simulate_trial_with_truth(params, truth_initial, events, 0, false);
  const auto best = filter_trajectory(params, config, reference.log);
  result.best_estimate = means_of(best);
  result.best_variance.resize(best.size());
  for (std::size_t i = 0; i < best.size(); ++i) {
    result.best_variance[i] = best[i].variance;
  }
  result.truth = reference.latent;

  // one shared truth rollout for fixed-record mode, drawn from its own stream
  SimulatedTrial shared;
  if (!options.resample_truth) {
    shared = simulate_trial_with_truth(
        params, truth_initial, events,
        substream_seed(options.seed ^ 0x7472757468ULL, 0), true);
  }

  result.runs.assign(static_cast<std::size_t>(options.n_runs), {});
  auto worker = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const std::uint64_t run_seed =
          substream_seed(options.seed, static_cast<std::uint64_t>(i));
      TrialLog log;
      if (options.resample_truth) {
        log = simulate_trial(params, truth_initial, events, run_seed, true);
      } else {
        log = shared.log;
        RandomStream stream(run_seed);
        const auto obs = observe_latent(params, shared.latent, stream);
        for (std::size_t t = 0; t < log.steps.size(); ++t) {
          log.steps[t].observation = obs[t];
        }
      }
      result.runs[static_cast<std::size_t>(i)] =
          means_of(filter_trajectory(params, config, log));
    }
  };

  const int n_threads = std::max(1, options.n_threads);
  if (n_threads == 1) {
    worker(0, options.n_runs);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (options.n_runs + n_threads - 1) / n_threads;
    for (int t = 0; t < n_threads; ++t) {
      const int begin = t * chunk;
      const int end = std::min(options.n_runs, begin + chunk);
      if (begin < end) pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }

  Bands bands = compute_bands(result.runs, options.band_mode);
  // the band invariant includes the noise-free reference
  for (std::size_t t = 0; t < bands.lower.size(); ++t) {
    bands.lower[t] = std::min(bands.lower[t], result.best_estimate[t]);
    bands.upper[t] = std::max(bands.upper[t], result.best_estimate[t]);
  }
  result.band_lower = std::move(bands.lower);
  result.band_upper = std::move(bands.upper);
  return result;
}

EnsembleResult run_ensemble(const ModelParameters& params,
                            const FilterConfig& config,
                            std::span<const EventKind> events,
                            double truth_initial, int n_runs, std::uint64_t seed) {
  EnsembleOptions options;
  options.n_runs = n_runs;
  options.seed = seed;
  return run_ensemble(params, config, events, truth_initial, options);
}

}  // namespace trustdyn
