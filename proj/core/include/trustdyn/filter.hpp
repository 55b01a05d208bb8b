#pragma once

#include <vector>

#include "trustdyn/model.hpp"

namespace trustdyn {

/// Gaussian belief over latent trust: mean in trust points, variance in
/// trust points squared. Variance stays >= 0 through any predict/update
/// sequence.
struct FilterState {
  double mean = 0.0;
  double variance = 0.0;
};

/// Prior belief used to start a filter replay. The default is a weakly
/// informative prior over the 1..100 scale: mean at the midpoint,
/// standard deviation 15 points.
struct FilterConfig {
  double initial_mean = 50.0;
  double initial_variance = 225.0;

  /// Throws std::invalid_argument unless finite and initial_variance > 0.
  void validate() const;
};

/// Time update: mean <- a*mean + b.[L,M,F], variance <- a^2*variance + q.
FilterState predict(const ModelParameters& params, FilterState belief,
                    EventKind event);

/// Measurement update fusing the present observation channels jointly.
/// Missing channels are dropped from the gain computation; with no channels
/// present the belief is returned unchanged. The variance update uses the
/// Joseph form, so it cannot go negative under rounding.
///
/// Throws NumericalError when the innovation covariance is singular (a
/// zero-variance channel observed with zero prior variance).
FilterState update(const ModelParameters& params, FilterState belief,
                   const ObservationVector& observation);

/// predict then update.
FilterState filter_step(const ModelParameters& params, FilterState belief,
                        EventKind event, const ObservationVector& observation);

/// Replays a trial log from the configured prior, one predict/update per
/// step, and returns the posterior belief after every step. The reported
/// trust column is never fed to the filter; estimates derive from the
/// behavioral observations alone.
std::vector<FilterState> filter_trajectory(const ModelParameters& params,
                                           const FilterConfig& config,
                                           const TrialLog& log);

/// Fixed point of the predicted-variance recursion
///
///   P <- a^2 (P - P c^T (c P c^T + diag(r))^-1 c P) + q
///
/// iterated from P = 0 until |dP| < 1e-12. This is the filter's long-run
/// one-step-ahead variance when every step fuses all three channels.
/// Requires every r entry > 0; throws NonConvergenceError if the safety
/// cap is hit.
double steady_state_variance(const ModelParameters& params);

}  // namespace trustdyn
