#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>

#include "trustdyn/model.hpp"

namespace trustdyn {

/// Dynamics-equation fit: T(t+1) regressed on T(t) and the event
/// indicators, with one additive intercept per participant.
struct DynamicsFit {
  double a = 0.0;
  std::array<double, 3> b{};
  double a_sem = 0.0;
  std::array<double, 3> b_sem{};
  double q = 0.0;  ///< residual variance, i.e. the fitted process noise
  std::map<std::string, double> intercepts;  ///< per participant, mean zero
  std::size_t n_rows = 0;                    ///< usable consecutive-report pairs
  int iterations = 0;                        ///< intercept refinement passes
};

/// Output-equation fit: each observation channel regressed on reported
/// trust through the origin, independently per channel.
struct ObservationFit {
  std::array<double, 3> c{};
  std::array<double, 3> c_sem{};
  std::array<double, 3> r{};  ///< residual variance per channel
  std::array<std::size_t, 3> n_rows{};
};

/// Combined fit over a log corpus. params carries the point estimates
/// including the fitted noise variances q and r; params.sem carries the
/// standard errors. n_observations counts every usable regression row
/// (dynamics pairs plus per-channel observation rows).
struct FitResult {
  ModelParameters params;
  std::map<std::string, double> per_participant_intercepts;
  std::size_t n_observations = 0;
  DynamicsFit dynamics;
  ObservationFit observation;
};

/// Fits the state equation by two-stage least squares: a pooled fit first,
/// then per-participant intercepts set to the participant means of the
/// residuals (centered to mean zero) and the coefficients re-fit against
/// the intercept-adjusted outcome, repeated until the intercepts move by
/// less than 1e-8.
///
/// Requires at least two participants, each contributing at least two
/// consecutive reported-trust pairs. Throws DegenerateDesignError when a
/// regressor cannot be identified, naming it (an event kind that never
/// occurs, or a collinear lagged-trust column).
DynamicsFit fit_dynamics(std::span<const TrialLog> logs);

/// Fits the output equation channelwise. Steps lacking a reported trust or
/// the channel value are skipped. Throws DegenerateDesignError when the
/// reported-trust column has zero variance or a channel has fewer than two
/// usable rows.
ObservationFit fit_observation(std::span<const TrialLog> logs);

/// fit_dynamics and fit_observation composed into one FitResult.
FitResult fit_all(std::span<const TrialLog> logs);

}  // namespace trustdyn
