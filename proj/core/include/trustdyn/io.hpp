#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustdyn/ensemble.hpp"
#include "trustdyn/filter.hpp"
#include "trustdyn/model.hpp"
#include "trustdyn/sysid.hpp"

namespace trustdyn {

/// An event schedule to simulate or estimate against: one or more trials,
/// a shared initial trust level, and (optionally) the model parameters,
/// inline or by preset name.
struct Scenario {
  std::vector<std::vector<EventKind>> trials;
  double initial_trust = 50.0;
  std::optional<ModelParameters> params;
  std::string params_ref;  ///< "table1", "inline", or empty when absent
};

/// Run-level knobs shared by the CLI subcommands.
struct RunConfig {
  std::uint64_t seed = 0;
  int n_runs = 1;
  FilterConfig filter{};
  BandMode band_mode{};
  std::filesystem::path out;

  void validate() const;  // n_runs >= 1, filter prior valid
};

/// Reads a scenario file (JSON). Unknown keys are rejected with the
/// offending key named; unknown event kinds are rejected with their
/// trials[i].events[k] path. Throws ValidationError.
Scenario load_scenario(const std::filesystem::path& path);

/// Resolves a --params style reference: the preset name "table1" or a
/// path to a parameters file (JSON with keys a, b, c, q, r and optional
/// sem).
ModelParameters load_parameters(const std::string& ref);

void save_parameters(const ModelParameters& params, const std::filesystem::path& path);

/// Reads trial logs from one tabular file or from every regular file in a
/// directory. Expected header:
///   participant_id,trial_id,event_index,event_type,reported_trust,phi,pi,upsilon
/// Rows are grouped by (participant, trial) and sorted by event_index;
/// indices must be contiguous from 0, reported trust must lie in [1, 100],
/// and empty observation cells become missing channels. Validation errors
/// cite the offending data row.
std::vector<TrialLog> load_trial_logs(const std::filesystem::path& path);

void write_trial_logs(std::span<const TrialLog> logs, const std::filesystem::path& path);

/// One row of plot-ready output. Unknown values stay empty in the file.
struct ResultRow {
  std::string participant_id;
  std::string trial_id;
  int step = 0;
  EventKind event = EventKind::TrueAlarm;
  std::optional<double> truth;
  std::optional<double> reported_trust;
  double estimate_mean = 0.0;
  double estimate_variance = 0.0;
  std::optional<double> band_lower;
  std::optional<double> band_upper;
};

void write_results(std::span<const ResultRow> rows, const std::filesystem::path& path);
std::vector<ResultRow> load_results(const std::filesystem::path& path);

/// Writes the fitted parameters as a parameters file that load_parameters
/// and the scenario inline-params reader accept.
void write_results(const FitResult& fit, const std::filesystem::path& path);

/// Rows for an estimate trajectory replayed over a log.
std::vector<ResultRow> make_result_rows(const TrialLog& log,
                                        std::span<const FilterState> trajectory);

/// Rows for an ensemble summary over one trial's event schedule.
std::vector<ResultRow> make_result_rows(std::span<const EventKind> events,
                                        const EnsembleResult& ensemble,
                                        const std::string& trial_id);

}  // namespace trustdyn
