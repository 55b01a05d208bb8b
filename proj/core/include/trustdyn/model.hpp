#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustdyn/rng.hpp"

namespace trustdyn {

/// One interaction event between the driver and the automated driving
/// system. Exactly one event occurs per time index.
enum class EventKind { TrueAlarm, Miss, FalseAlarm };

inline constexpr std::array<EventKind, 3> kAllEvents = {
    EventKind::TrueAlarm, EventKind::Miss, EventKind::FalseAlarm};

/// One-hot input vector [L, M, F] for the state equation.
constexpr std::array<double, 3> event_indicator(EventKind kind) {
  switch (kind) {
    case EventKind::TrueAlarm: return {1.0, 0.0, 0.0};
    case EventKind::Miss: return {0.0, 1.0, 0.0};
    case EventKind::FalseAlarm: return {0.0, 0.0, 1.0};
  }
  return {0.0, 0.0, 0.0};
}

std::string_view event_name(EventKind kind);
std::optional<EventKind> parse_event(std::string_view name);

/// Standard errors accompanying a parameter estimate, mirroring the layout
/// of ModelParameters.
struct ParameterErrors {
  double a = 0.0;
  std::array<double, 3> b{};
  std::array<double, 3> c{};
};

/// Parameters of the linear trust model
///
///   T(t+1)             = a T(t) + b . [L(t), M(t), F(t)] + u(t)
///   [phi, pi, upsilon] = c T(t) + w(t)
///
/// with u ~ N(0, q) and w ~ N(0, diag(r)). Trust T is in points on the
/// 1..100 self-report scale; b is in trust points per event, ordered
/// (true alarm, miss, false alarm); c maps trust points to the three
/// behavioral observation channels (visual focus, NDRT performance,
/// automation usage).
struct ModelParameters {
  double a = 1.0;
  std::array<double, 3> b{};
  std::array<double, 3> c{};
  double q = 0.0;
  std::array<double, 3> r{};
  std::optional<ParameterErrors> sem;

  /// Throws std::invalid_argument unless all entries are finite,
  /// q >= 0 and r >= 0.
  void validate() const;

  /// As validate(), but additionally requires every r entry > 0 so the
  /// observation-noise covariance is invertible.
  void validate_for_estimation() const;
};

/// The published parameter set for trust in an automated driving system,
/// identified from 80 participants. Available to file loaders and the CLI
/// under the preset name "table1".
ModelParameters table1_parameters();

/// Latent trust level, in points on the 1..100 self-report scale. The
/// linear dynamics are free to leave [1, 100]; only clamp_report()
/// saturates, when a self-report value is produced.
struct TrustState {
  double value = 0.0;
};

/// The three behavioral observation channels. A disengaged sensor (e.g.
/// lost eye tracking) is a missing channel, not a zero.
struct ObservationVector {
  std::optional<double> phi;      ///< visual focus
  std::optional<double> pi;       ///< NDRT performance
  std::optional<double> upsilon;  ///< automation usage

  std::optional<double> channel(int i) const {
    return i == 0 ? phi : i == 1 ? pi : upsilon;
  }
  void set_channel(int i, std::optional<double> v) {
    (i == 0 ? phi : i == 1 ? pi : upsilon) = v;
  }
};

/// One logged step: the event at this index, the (clamped) self-reported
/// trust if it was collected, and the observed behaviors.
struct TrialStep {
  EventKind event = EventKind::TrueAlarm;
  std::optional<double> reported_trust;
  ObservationVector observation;
};

/// Per-participant, per-trial event/report/observation sequence. The event
/// index is the position in steps (t = 0, 1, ...). Trials are independent
/// rollouts; state does not carry across trials.
struct TrialLog {
  std::string participant_id;
  std::string trial_id;
  std::vector<TrialStep> steps;
};

/// Saturates a latent trust value onto the 1..100 reporting scale.
double clamp_report(double t_value);

/// One application of the state equation: a*T + b.[L,M,F] + noise_u.
/// Pass noise_u = 0 for deterministic propagation, or a sample from
/// N(0, q). Throws std::invalid_argument on non-finite input.
TrustState step_state(const ModelParameters& params, TrustState state,
                      EventKind event, double noise_u);

/// One application of the output equation: c*T + noise_w, componentwise.
/// All three channels are produced.
ObservationVector emit_observation(const ModelParameters& params, TrustState state,
                                   const std::array<double, 3>& noise_w);

/// A simulated trial together with the unclamped latent trust trajectory
/// that generated it. latent[t] is the state after the event at index t.
struct SimulatedTrial {
  TrialLog log;
  std::vector<double> latent;
};

/// Rolls the model forward over the given events: step_state then
/// emit_observation per event. When stochastic, u and w are drawn from a
/// stream seeded with `seed` (identical inputs and seed give identical
/// output); otherwise both noises are zero. reported_trust records
/// clamp_report of the latent state.
///
/// Throws std::invalid_argument if events is empty or initial_trust is
/// not finite.
SimulatedTrial simulate_trial_with_truth(const ModelParameters& params,
                                         double initial_trust,
                                         std::span<const EventKind> events,
                                         std::uint64_t seed, bool stochastic);

/// As simulate_trial_with_truth, keeping only the log.
TrialLog simulate_trial(const ModelParameters& params, double initial_trust,
                        std::span<const EventKind> events, std::uint64_t seed,
                        bool stochastic);

/// Fresh observations of an existing latent trajectory, one per step, with
/// measurement noise drawn from `stream`. Used to re-observe a shared
/// ground-truth rollout.
std::vector<ObservationVector> observe_latent(const ModelParameters& params,
                                              std::span<const double> latent,
                                              RandomStream& stream);

}  // namespace trustdyn
