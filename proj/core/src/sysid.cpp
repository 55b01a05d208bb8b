#include "trustdyn/sysid.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "trustdyn/errors.hpp"

namespace trustdyn {

namespace {

struct DynamicsRows {
  Eigen::MatrixXd x;           // columns: T(t-1), L, M, F
  Eigen::VectorXd y;           // T(t)
  std::vector<int> row_owner;  // participant index per row
  std::vector<std::string> participants;
};

DynamicsRows collect_dynamics_rows(std::span<const TrialLog> logs) {
  std::map<std::string, int> participant_index;
  std::vector<std::string> participants;
  std::vector<std::array<double, 5>> rows;  // t_prev, L, M, F, y
  std::vector<int> owners;

  for (const TrialLog& log : logs) {
    for (std::size_t t = 1; t < log.steps.size(); ++t) {
      const auto& prev = log.steps[t - 1];
      const auto& cur = log.steps[t];
      if (!prev.reported_trust || !cur.reported_trust) continue;
      auto [it, inserted] = participant_index.try_emplace(
          log.participant_id, static_cast<int>(participants.size()));
      if (inserted) participants.push_back(log.participant_id);
      const auto ind = event_indicator(cur.event);
      rows.push_back({*prev.reported_trust, ind[0], ind[1], ind[2],
                      *cur.reported_trust});
      owners.push_back(it->second);
    }
  }

  DynamicsRows out;
  out.participants = std::move(participants);
  out.row_owner = std::move(owners);
  out.x.resize(static_cast<Eigen::Index>(rows.size()), 4);
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    out.x(idx, 0) = rows[i][0];
    out.x(idx, 1) = rows[i][1];
    out.x(idx, 2) = rows[i][2];
    out.x(idx, 3) = rows[i][3];
    out.y(idx) = rows[i][4];
  }
  return out;
}

void check_dynamics_design(const DynamicsRows& rows) {
  const Eigen::Index n = rows.x.rows();
  if (rows.participants.size() < 2) {
    throw ValidationError("fit_dynamics requires at least 2 participants with usable rows");
  }
  std::vector<int> per_participant(rows.participants.size(), 0);
  for (int owner : rows.row_owner) per_participant[static_cast<std::size_t>(owner)]++;
  for (std::size_t p = 0; p < per_participant.size(); ++p) {
    if (per_participant[p] < 2) {
      throw ValidationError("fit_dynamics requires >= 2 consecutive reported-trust pairs per participant; participant '" +
                            rows.participants[p] + "' has " +
                            std::to_string(per_participant[p]));
    }
  }
  for (int k = 0; k < 3; ++k) {
    if (rows.x.col(k + 1).cwiseAbs().maxCoeff() == 0.0) {
      throw DegenerateDesignError(
          std::string("degenerate design: event type '") +
          std::string(event_name(kAllEvents[static_cast<std::size_t>(k)])) +
          "' never occurs in the corpus");
    }
  }
  if (n < 5) {
    throw ValidationError("fit_dynamics needs more rows than coefficients");
  }
}

}  // namespace

DynamicsFit fit_dynamics(std::span<const TrialLog> logs) {
  if (logs.empty()) {
    throw std::invalid_argument("fit_dynamics requires a nonempty log corpus");
  }
  DynamicsRows rows = collect_dynamics_rows(logs);
  check_dynamics_design(rows);

  const Eigen::Index n = rows.x.rows();
  const auto n_participants = static_cast<Eigen::Index>(rows.participants.size());

  // Column equilibration keeps the solve well conditioned; the recovered
  // coefficients are rescaled back, so estimates are unchanged.
  Eigen::Vector4d col_scale;
  for (int j = 0; j < 4; ++j) {
    const double s = rows.x.col(j).cwiseAbs().maxCoeff();
    col_scale(j) = s > 0.0 ? s : 1.0;
  }
  const Eigen::MatrixXd x_scaled = rows.x * col_scale.cwiseInverse().asDiagonal();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x_scaled);
  qr.setThreshold(1e-10);
  if (qr.rank() < 4) {
    throw DegenerateDesignError(
        "degenerate design: the lagged-trust column is collinear with the event indicators");
  }

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n_participants);
  Eigen::VectorXd alpha_rows = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd beta;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(n_participants);
  for (int owner : rows.row_owner) counts(owner) += 1.0;

  constexpr int kMaxPasses = 10'000;
  constexpr double kTol = 1e-8;
  int passes = 0;
  for (;; ++passes) {
    if (passes >= kMaxPasses) {
      throw NonConvergenceError("fit_dynamics intercepts did not converge");
    }
    beta = qr.solve(rows.y - alpha_rows).cwiseQuotient(col_scale);
    const Eigen::VectorXd resid = rows.y - rows.x * beta;
    Eigen::VectorXd alpha_next = Eigen::VectorXd::Zero(n_participants);
    for (Eigen::Index i = 0; i < n; ++i) {
      alpha_next(rows.row_owner[static_cast<std::size_t>(i)]) += resid(i);
    }
    alpha_next.array() /= counts.array();
    // center by the row-weighted mean so the intercepts equal the
    // participant means of the final residuals at convergence
    alpha_next.array() -= counts.dot(alpha_next) / static_cast<double>(n);
    const double delta = (alpha_next - alpha).cwiseAbs().maxCoeff();
    alpha = alpha_next;
    for (Eigen::Index i = 0; i < n; ++i) {
      alpha_rows(i) = alpha(rows.row_owner[static_cast<std::size_t>(i)]);
    }
    if (delta < kTol) break;
  }

  const Eigen::VectorXd resid = rows.y - rows.x * beta - alpha_rows;
  const Eigen::Index dof = n - 4 - (n_participants - 1);
  if (dof < 1) {
    throw ValidationError("fit_dynamics has no residual degrees of freedom");
  }
  const double q_hat = resid.squaredNorm() / static_cast<double>(dof);

  const Eigen::Matrix4d xtx_scaled = x_scaled.transpose() * x_scaled;
  const Eigen::Matrix4d cov_scaled = xtx_scaled.ldlt().solve(Eigen::Matrix4d::Identity());
  Eigen::Vector4d sem;
  for (int j = 0; j < 4; ++j) {
    sem(j) = std::sqrt(std::max(0.0, q_hat * cov_scaled(j, j))) / col_scale(j);
  }

  DynamicsFit fit;
  fit.a = beta(0);
  fit.b = {beta(1), beta(2), beta(3)};
  fit.a_sem = sem(0);
  fit.b_sem = {sem(1), sem(2), sem(3)};
  fit.q = q_hat;
  for (std::size_t p = 0; p < rows.participants.size(); ++p) {
    fit.intercepts[rows.participants[p]] = alpha(static_cast<Eigen::Index>(p));
  }
  fit.n_rows = static_cast<std::size_t>(n);
  fit.iterations = passes + 1;
  return fit;
}

ObservationFit fit_observation(std::span<const TrialLog> logs) {
  if (logs.empty()) {
    throw std::invalid_argument("fit_observation requires a nonempty log corpus");
  }

  ObservationFit fit;
  for (int k = 0; k < 3; ++k) {
    double sum_tt = 0.0, sum_ty = 0.0, sum_t = 0.0;
    std::size_t n = 0;
    for (const TrialLog& log : logs) {
      for (const TrialStep& step : log.steps) {
        if (!step.reported_trust || !step.observation.channel(k)) continue;
        const double t = *step.reported_trust;
        const double y = *step.observation.channel(k);
        sum_tt += t * t;
        sum_ty += t * y;
        sum_t += t;
        ++n;
      }
    }
    if (n < 2) {
      throw DegenerateDesignError(
          "degenerate design: observation channel " + std::to_string(k) +
          " has fewer than 2 usable rows");
    }
    const double mean_t = sum_t / static_cast<double>(n);
    const double var_t = sum_tt / static_cast<double>(n) - mean_t * mean_t;
    if (!(var_t > 1e-12 * std::max(1.0, mean_t * mean_t))) {
      throw DegenerateDesignError(
          "degenerate design: reported trust has zero variance");
    }
    const double c_hat = sum_ty / sum_tt;

    double ssr = 0.0;
    for (const TrialLog& log : logs) {
      for (const TrialStep& step : log.steps) {
        if (!step.reported_trust || !step.observation.channel(k)) continue;
        const double e = *step.observation.channel(k) - c_hat * *step.reported_trust;
        ssr += e * e;
      }
    }
    const double r_hat = ssr / static_cast<double>(n - 1);
    fit.c[static_cast<std::size_t>(k)] = c_hat;
    fit.r[static_cast<std::size_t>(k)] = r_hat;
    fit.c_sem[static_cast<std::size_t>(k)] = std::sqrt(r_hat / sum_tt);
    fit.n_rows[static_cast<std::size_t>(k)] = n;
  }
  return fit;
}

FitResult fit_all(std::span<const TrialLog> logs) {
  if (logs.empty()) {
    throw std::invalid_argument("fit_all requires a nonempty log corpus");
  }
  FitResult result;
  result.dynamics = fit_dynamics(logs);
  result.observation = fit_observation(logs);

  result.params.a = result.dynamics.a;
  result.params.b = result.dynamics.b;
  result.params.c = result.observation.c;
  result.params.q = result.dynamics.q;
  result.params.r = result.observation.r;
  result.params.sem = ParameterErrors{result.dynamics.a_sem, result.dynamics.b_sem,
                                      result.observation.c_sem};
  result.per_participant_intercepts = result.dynamics.intercepts;
  result.n_observations = result.dynamics.n_rows + result.observation.n_rows[0] +
                          result.observation.n_rows[1] + result.observation.n_rows[2];
  return result;
}

}  // namespace trustdyn
