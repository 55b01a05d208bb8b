#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trustdyn/filter.hpp"
#include "trustdyn/model.hpp"

namespace trustdyn {

enum class BandKind { MinMax, Percentile };

/// Envelope definition for an ensemble of estimate trajectories: the
/// pointwise min/max over runs (default), or the pointwise [p, 1-p]
/// percentile envelope for p in (0, 0.5).
struct BandMode {
  BandKind kind = BandKind::MinMax;
  double percentile = 0.05;
};

struct Bands {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Pointwise envelope over equal-length trajectories. Throws
/// std::invalid_argument for an empty or ragged run list, or a percentile
/// outside (0, 0.5). Percentiles interpolate linearly between order
/// statistics, so the result is always nested inside the min/max envelope.
Bands compute_bands(const std::vector<std::vector<double>>& runs,
                    const BandMode& mode);

struct EnsembleOptions {
  int n_runs = 100;
  std::uint64_t seed = 0;
  /// Re-sample the latent truth rollout per run (default). When false, one
  /// shared truth rollout is drawn once and only the observations fed to
  /// the filter are re-sampled per run.
  bool resample_truth = true;
  /// Worker threads for the independent runs. Results are identical for
  /// any thread count: each run draws from its own substream and lands in
  /// its own slot.
  int n_threads = 1;
  BandMode band_mode{};
};

/// Repeated noisy filter runs over one event schedule, plus the noise-free
/// reference replay. The band always contains best_estimate, and every run
/// lies inside the min/max envelope.
struct EnsembleResult {
  std::vector<std::vector<double>> runs;  ///< per-run posterior mean per step
  std::vector<double> band_lower;
  std::vector<double> band_upper;
  std::vector<double> best_estimate;      ///< noise-free replay, posterior means
  std::vector<double> best_variance;      ///< noise-free replay, posterior variances
  std::vector<double> truth;              ///< noise-free latent rollout
};

EnsembleResult run_ensemble(const ModelParameters& params,
                            const FilterConfig& config,
                            std::span<const EventKind> events,
                            double truth_initial, const EnsembleOptions& options);

/// Convenience overload with default modes: n_runs fresh rollouts,
/// min/max bands, single thread.
EnsembleResult run_ensemble(const ModelParameters& params,
                            const FilterConfig& config,
                            std::span<const EventKind> events,
                            double truth_initial, int n_runs, std::uint64_t seed);

}  // namespace trustdyn
