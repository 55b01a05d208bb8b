#include "trustdyn/filter.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "trustdyn/errors.hpp"

namespace trustdyn {

void FilterConfig::validate() const {
  if (!std::isfinite(initial_mean) || !std::isfinite(initial_variance)) {
    throw std::invalid_argument("filter prior must be finite");
  }
  if (initial_variance <= 0.0) {
    throw std::invalid_argument("filter prior variance must be > 0");
  }
}

namespace {

void require_finite(FilterState belief) {
  if (!std::isfinite(belief.mean) || !std::isfinite(belief.variance) ||
      belief.variance < 0.0) {
    throw std::invalid_argument("filter belief must be finite with variance >= 0");
  }
}

// Joint measurement update over the k present channels. The state is
// scalar, so the gain solve is a k x k symmetric system, k <= 3.
FilterState joint_update(const ModelParameters& params, FilterState belief,
                         const ObservationVector& observation) {
  int idx[3];
  int k = 0;
  for (int i = 0; i < 3; ++i) {
    if (observation.channel(i).has_value()) {
      if (!std::isfinite(*observation.channel(i))) {
        throw std::invalid_argument("observation channels must be finite");
      }
      idx[k++] = i;
    }
  }
  if (k == 0) return belief;

  Eigen::VectorXd c(k), innovation(k), r(k);
  for (int j = 0; j < k; ++j) {
    c(j) = params.c[idx[j]];
    r(j) = params.r[idx[j]];
    innovation(j) = *observation.channel(idx[j]) - c(j) * belief.mean;
  }

  const double p = belief.variance;
  Eigen::MatrixXd s = p * (c * c.transpose());
  s.diagonal() += r;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(s);
  const double d_max = ldlt.vectorD().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || d_max <= 0.0 ||
      ldlt.vectorD().minCoeff() < 2.5e-16 * k * d_max) {
    throw NumericalError("singular innovation covariance in measurement update");
  }
  const Eigen::VectorXd gain = ldlt.solve(p * c);  // K^T

  FilterState post;
  post.mean = belief.mean + gain.dot(innovation);
  // Joseph form: (1 - Kc)^2 P + K diag(r) K^T, a sum of nonnegative terms
  const double one_minus_kc = 1.0 - gain.dot(c);
  post.variance = one_minus_kc * one_minus_kc * p + gain.cwiseAbs2().dot(r);
  return post;
}

}  // namespace

FilterState predict(const ModelParameters& params, FilterState belief,
                    EventKind event) {
  params.validate();
  require_finite(belief);
  const auto ind = event_indicator(event);
  FilterState next;
  next.mean = params.a * belief.mean;
  for (int i = 0; i < 3; ++i) next.mean += params.b[i] * ind[i];
  next.variance = params.a * params.a * belief.variance + params.q;
  return next;
}

FilterState update(const ModelParameters& params, FilterState belief,
                   const ObservationVector& observation) {
  params.validate();
  require_finite(belief);
  return joint_update(params, belief, observation);
}

FilterState filter_step(const ModelParameters& params, FilterState belief,
                        EventKind event, const ObservationVector& observation) {
  return update(params, predict(params, belief, event), observation);
}

std::vector<FilterState> filter_trajectory(const ModelParameters& params,
                                           const FilterConfig& config,
                                           const TrialLog& log) {
  params.validate_for_estimation();
  config.validate();
  if (log.steps.empty()) {
    throw std::invalid_argument("filter_trajectory requires a nonempty log");
  }
  std::vector<FilterState> out;
  out.reserve(log.steps.size());
  FilterState belief{config.initial_mean, config.initial_variance};
  for (const TrialStep& step : log.steps) {
    belief = filter_step(params, belief, step.event, step.observation);
    out.push_back(belief);
  }
  return out;
}

double steady_state_variance(const ModelParameters& params) {
  params.validate_for_estimation();

  ObservationVector full;  // all channels present; values are irrelevant to
  for (int i = 0; i < 3; ++i) full.set_channel(i, 0.0);  // the variance path

  constexpr int kMaxIterations = 10'000'000;
  double p = 0.0;
  for (int i = 0; i < kMaxIterations; ++i) {
    FilterState posterior = update(params, FilterState{0.0, p}, full);
    const double next = params.a * params.a * posterior.variance + params.q;
    if (!std::isfinite(next)) {
      throw NonConvergenceError("variance recursion diverged");
    }
    if (std::abs(next - p) < 1e-12) {
      return next;
    }
    p = next;
  }
  throw NonConvergenceError("variance recursion hit the iteration cap");
}

}  // namespace trustdyn
