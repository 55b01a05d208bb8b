#include "trustdyn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace trustdyn {

namespace {

bool all_finite(const std::array<double, 3>& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

}  // namespace

std::string_view event_name(EventKind kind) {
  switch (kind) {
    case EventKind::TrueAlarm: return "true_alarm";
    case EventKind::Miss: return "miss";
    case EventKind::FalseAlarm: return "false_alarm";
  }
  return "?";
}

std::optional<EventKind> parse_event(std::string_view name) {
  if (name == "true_alarm") return EventKind::TrueAlarm;
  if (name == "miss") return EventKind::Miss;
  if (name == "false_alarm") return EventKind::FalseAlarm;
  return std::nullopt;
}

void ModelParameters::validate() const {
  if (!std::isfinite(a) || !all_finite(b) || !all_finite(c) ||
      !std::isfinite(q) || !all_finite(r)) {
    throw std::invalid_argument("model parameters must be finite");
  }
  if (q < 0.0) {
    throw std::invalid_argument("process-noise variance q must be >= 0");
  }
  for (double rk : r) {
    if (rk < 0.0) {
      throw std::invalid_argument("observation-noise variances r must be >= 0");
    }
  }
}

void ModelParameters::validate_for_estimation() const {
  validate();
  for (double rk : r) {
    if (rk <= 0.0) {
      throw std::invalid_argument(
          "estimation requires every observation-noise variance r > 0");
    }
  }
}

ModelParameters table1_parameters() {
  ModelParameters p;
  p.a = 1.00;
  p.b = {0.224, -0.670, -0.798};
  p.c = {7.01e-3, 4.23e-3, 9.20e-3};
  p.q = 0.26;
  p.r = {0.18, 0.07, 0.06};
  p.sem = ParameterErrors{0.25, {0.079, 0.084, 0.083}, {3.6e-4, 1.3e-4, 1.0e-4}};
  return p;
}

double clamp_report(double t_value) {
  if (!std::isfinite(t_value)) {
    throw std::invalid_argument("trust value must be finite");
  }
  return t_value < 1.0 ? 1.0 : t_value > 100.0 ? 100.0 : t_value;
}

TrustState step_state(const ModelParameters& params, TrustState state,
                      EventKind event, double noise_u) {
  params.validate();
  if (!std::isfinite(state.value) || !std::isfinite(noise_u)) {
    throw std::invalid_argument("step_state requires finite state and noise");
  }
  const auto ind = event_indicator(event);
  double next = params.a * state.value + noise_u;
  for (int k = 0; k < 3; ++k) next += params.b[k] * ind[k];
  return TrustState{next};
}

ObservationVector emit_observation(const ModelParameters& params, TrustState state,
                                   const std::array<double, 3>& noise_w) {
  params.validate();
  if (!std::isfinite(state.value) || !all_finite(noise_w)) {
    throw std::invalid_argument("emit_observation requires finite state and noise");
  }
  ObservationVector obs;
  for (int k = 0; k < 3; ++k) {
    obs.set_channel(k, params.c[k] * state.value + noise_w[k]);
  }
  return obs;
}

SimulatedTrial simulate_trial_with_truth(const ModelParameters& params,
                                         double initial_trust,
                                         std::span<const EventKind> events,
                                         std::uint64_t seed, bool stochastic) {
  params.validate();
  if (events.empty()) {
    throw std::invalid_argument("simulate_trial requires a nonempty event list");
  }
  if (!std::isfinite(initial_trust)) {
    throw std::invalid_argument("initial trust must be finite");
  }

  RandomStream stream(seed);
  const double u_sd = std::sqrt(params.q);
  const std::array<double, 3> w_sd = {std::sqrt(params.r[0]),
                                      std::sqrt(params.r[1]),
                                      std::sqrt(params.r[2])};

  SimulatedTrial out;
  out.log.steps.reserve(events.size());
  out.latent.reserve(events.size());

  TrustState state{initial_trust};
  for (EventKind event : events) {
    // draw order per step is frozen: u, then w for phi, pi, upsilon
    const double u = stochastic ? stream.normal(u_sd) : 0.0;
    std::array<double, 3> w{};
    if (stochastic) {
      for (int k = 0; k < 3; ++k) w[k] = stream.normal(w_sd[k]);
    }
    state = step_state(params, state, event, u);
    TrialStep step;
    step.event = event;
    step.reported_trust = clamp_report(state.value);
    step.observation = emit_observation(params, state, w);
    out.log.steps.push_back(step);
    out.latent.push_back(state.value);
  }
  return out;
}

TrialLog simulate_trial(const ModelParameters& params, double initial_trust,
                        std::span<const EventKind> events, std::uint64_t seed,
                        bool stochastic) {
  return simulate_trial_with_truth(params, initial_trust, events, seed, stochastic).log;
}

std::vector<ObservationVector> observe_latent(const ModelParameters& params,
                                              std::span<const double> latent,
                                              RandomStream& stream) {
  params.validate();
  std::vector<ObservationVector> out;
  out.reserve(latent.size());
  const std::array<double, 3> w_sd = {std::sqrt(params.r[0]),
                                      std::sqrt(params.r[1]),
                                      std::sqrt(params.r[2])};
  for (double t : latent) {
    std::array<double, 3> w;
    for (int k = 0; k < 3; ++k) w[k] = stream.normal(w_sd[k]);
    out.push_back(emit_observation(params, TrustState{t}, w));
  }
  return out;
}

}  // namespace trustdyn
