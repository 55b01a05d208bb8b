#include "trustdyn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

#include "trustdyn/errors.hpp"

namespace trustdyn {

namespace {

using nlohmann::json;

constexpr const char* kLogHeader =
    "participant_id,trial_id,event_index,event_type,reported_trust,phi,pi,upsilon";
constexpr const char* kResultHeader =
    "participant_id,trial_id,step,event_type,truth,reported_trust,"
    "estimate_mean,estimate_variance,band_lower,band_upper";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

double parse_double(std::string_view text, const std::string& where) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ValidationError(where + ": expected a finite number, got '" +
                          std::string(text) + "'");
  }
  return value;
}

long parse_index(std::string_view text, const std::string& where) {
  long value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || value < 0) {
    throw ValidationError(where + ": expected a nonnegative integer, got '" +
                          std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return key == k;
        }) == known.end()) {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
}

std::array<double, 3> parse_triplet(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw ValidationError(where + ": expected an array of 3 numbers");
  }
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    if (!j[static_cast<std::size_t>(k)].is_number()) {
      throw ValidationError(where + "[" + std::to_string(k) + "]: expected a number");
    }
    out[static_cast<std::size_t>(k)] = j[static_cast<std::size_t>(k)].get<double>();
  }
  return out;
}

ModelParameters parameters_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) {
    throw ValidationError(where + ": expected a parameters object");
  }
  reject_unknown_keys(j, {"a", "b", "c", "q", "r", "sem"}, where);
  for (const char* key : {"a", "b", "c", "q", "r"}) {
    if (!j.contains(key)) {
      throw ValidationError(where + ": missing key '" + std::string(key) + "'");
    }
  }
  ModelParameters p;
  if (!j["a"].is_number() || !j["q"].is_number()) {
    throw ValidationError(where + ": 'a' and 'q' must be numbers");
  }
  p.a = j["a"].get<double>();
  p.q = j["q"].get<double>();
  p.b = parse_triplet(j["b"], where + ".b");
  p.c = parse_triplet(j["c"], where + ".c");
  p.r = parse_triplet(j["r"], where + ".r");
  if (j.contains("sem")) {
    const json& s = j["sem"];
    if (!s.is_object()) throw ValidationError(where + ".sem: expected an object");
    reject_unknown_keys(s, {"a", "b", "c"}, where + ".sem");
    ParameterErrors sem;
    if (s.contains("a")) sem.a = s["a"].get<double>();
    if (s.contains("b")) sem.b = parse_triplet(s["b"], where + ".sem.b");
    if (s.contains("c")) sem.c = parse_triplet(s["c"], where + ".sem.c");
    p.sem = sem;
  }
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(where + ": " + e.what());
  }
  return p;
}

json parameters_to_json(const ModelParameters& p) {
  json j;
  j["a"] = p.a;
  j["b"] = p.b;
  j["c"] = p.c;
  j["q"] = p.q;
  j["r"] = p.r;
  if (p.sem) {
    j["sem"] = {{"a", p.sem->a}, {"b", p.sem->b}, {"c", p.sem->c}};
  }
  return j;
}

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open '" + path.string() + "'");
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw ValidationError("cannot write '" + path.string() + "'");
  }
  return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw ValidationError("write failed for '" + path.string() + "'");
  }
}

}  // namespace

void RunConfig::validate() const {
  if (n_runs < 1) {
    throw std::invalid_argument("n_runs must be >= 1");
  }
  filter.validate();
}

Scenario load_scenario(const std::filesystem::path& path) {
  const json j = parse_json_file(path);
  if (!j.is_object()) {
    throw ValidationError(path.string() + ": expected a top-level object");
  }
  reject_unknown_keys(j, {"trials", "initial_trust", "params"}, path.string());
  if (!j.contains("trials")) {
    throw ValidationError(path.string() + ": missing key 'trials'");
  }

  Scenario scenario;
  if (j.contains("initial_trust")) {
    if (!j["initial_trust"].is_number()) {
      throw ValidationError(path.string() + ": initial_trust must be a number");
    }
    scenario.initial_trust = j["initial_trust"].get<double>();
    if (!std::isfinite(scenario.initial_trust)) {
      throw ValidationError(path.string() + ": initial_trust must be finite");
    }
  }

  const json& trials = j["trials"];
  if (!trials.is_array() || trials.empty()) {
    throw ValidationError(path.string() + ": trials must be a nonempty array");
  }
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const json* events = &trials[i];
    const std::string trial_where = "trials[" + std::to_string(i) + "]";
    if (events->is_object()) {
      reject_unknown_keys(*events, {"events"}, trial_where);
      if (!events->contains("events")) {
        throw ValidationError(trial_where + ": missing key 'events'");
      }
      events = &(*events)["events"];
    }
    if (!events->is_array() || events->empty()) {
      throw ValidationError(trial_where + ": expected a nonempty event array");
    }
    std::vector<EventKind> kinds;
    kinds.reserve(events->size());
    for (std::size_t k = 0; k < events->size(); ++k) {
      const json& e = (*events)[k];
      const std::string where = trial_where + ".events[" + std::to_string(k) + "]";
      if (!e.is_string()) {
        throw ValidationError(where + ": expected an event string");
      }
      const auto kind = parse_event(e.get<std::string>());
      if (!kind) {
        throw ValidationError(where + ": unknown event kind '" +
                              e.get<std::string>() + "'");
      }
      kinds.push_back(*kind);
    }
    scenario.trials.push_back(std::move(kinds));
  }

  if (j.contains("params")) {
    const json& p = j["params"];
    if (p.is_string()) {
      scenario.params = load_parameters(p.get<std::string>());
      scenario.params_ref = p.get<std::string>();
    } else {
      scenario.params = parameters_from_json(p, path.string() + ": params");
      scenario.params_ref = "inline";
    }
  }
  return scenario;
}

ModelParameters load_parameters(const std::string& ref) {
  if (ref == "table1") {
    return table1_parameters();
  }
  const std::filesystem::path path(ref);
  if (!std::filesystem::exists(path)) {
    throw ValidationError("unknown parameter preset or missing file '" + ref + "'");
  }
  return parameters_from_json(parse_json_file(path), path.string());
}

void save_parameters(const ModelParameters& params, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << parameters_to_json(params).dump(2) << '\n';
  finish_write(out, path);
}

namespace {

struct RawLogRow {
  std::string participant_id;
  std::string trial_id;
  long event_index;
  TrialStep step;
  std::string where;  // "file:row N" for diagnostics
};

void parse_log_file(const std::filesystem::path& path, std::vector<RawLogRow>& rows) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(path.string() + ": empty file, expected header '" +
                          kLogHeader + "'");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kLogHeader) {
    throw ValidationError(path.string() + ": schema mismatch, expected header '" +
                          kLogHeader + "'");
  }

  long row_number = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_number;
    const std::string where =
        path.string() + ": row " + std::to_string(row_number);
    const auto fields = split_csv_line(line);
    if (fields.size() != 8) {
      throw ValidationError(where + ": expected 8 columns, got " +
                            std::to_string(fields.size()));
    }
    RawLogRow row;
    row.participant_id = fields[0];
    row.trial_id = fields[1];
    if (row.participant_id.empty() || row.trial_id.empty()) {
      throw ValidationError(where + ": participant_id and trial_id must be nonempty");
    }
    row.event_index = parse_index(fields[2], where + ": event_index");
    const auto kind = parse_event(fields[3]);
    if (!kind) {
      throw ValidationError(where + ": unknown event kind '" + fields[3] + "'");
    }
    row.step.event = *kind;
    if (!fields[4].empty()) {
      const double trust = parse_double(fields[4], where + ": reported_trust");
      if (trust < 1.0 || trust > 100.0) {
        throw ValidationError(where + ": reported_trust " + fields[4] +
                              " out of range [1, 100]");
      }
      row.step.reported_trust = trust;
    }
    for (int k = 0; k < 3; ++k) {
      const std::string& cell = fields[static_cast<std::size_t>(5 + k)];
      if (cell.empty()) continue;
      row.step.observation.set_channel(
          k, parse_double(cell, where + ": observation"));
    }
    row.where = where;
    rows.push_back(std::move(row));
  }
}

}  // namespace

std::vector<TrialLog> load_trial_logs(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      throw ValidationError("no log files in directory '" + path.string() + "'");
    }
  } else if (std::filesystem::exists(path)) {
    files.push_back(path);
  } else {
    throw ValidationError("no such log file or directory '" + path.string() + "'");
  }

  std::vector<RawLogRow> rows;
  for (const auto& file : files) {
    parse_log_file(file, rows);
  }

  // group by (participant, trial) in first-appearance order
  std::map<std::pair<std::string, std::string>, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  std::vector<TrialLog> logs;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto key = std::make_pair(rows[i].participant_id, rows[i].trial_id);
    auto [it, inserted] = group_of.try_emplace(key, groups.size());
    if (inserted) {
      groups.emplace_back();
      TrialLog log;
      log.participant_id = rows[i].participant_id;
      log.trial_id = rows[i].trial_id;
      logs.push_back(std::move(log));
    }
    groups[it->second].push_back(i);
  }

  for (std::size_t g = 0; g < groups.size(); ++g) {
    auto& members = groups[g];
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
      return rows[a].event_index < rows[b].event_index;
    });
    for (std::size_t pos = 0; pos < members.size(); ++pos) {
      const RawLogRow& row = rows[members[pos]];
      if (row.event_index != static_cast<long>(pos)) {
        throw ValidationError(
            row.where + ": non-contiguous event_index " +
            std::to_string(row.event_index) + " for participant '" +
            row.participant_id + "' trial '" + row.trial_id +
            "' (expected " + std::to_string(pos) + ")");
      }
      logs[g].steps.push_back(row.step);
    }
  }
  return logs;
}

void write_trial_logs(std::span<const TrialLog> logs, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << kLogHeader << '\n';
  for (const TrialLog& log : logs) {
    for (std::size_t t = 0; t < log.steps.size(); ++t) {
      const TrialStep& step = log.steps[t];
      out << log.participant_id << ',' << log.trial_id << ',' << t << ','
          << event_name(step.event) << ',' << format_optional(step.reported_trust)
          << ',' << format_optional(step.observation.phi) << ','
          << format_optional(step.observation.pi) << ','
          << format_optional(step.observation.upsilon) << '\n';
    }
  }
  finish_write(out, path);
}

void write_results(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << kResultHeader << '\n';
  for (const ResultRow& row : rows) {
    out << row.participant_id << ',' << row.trial_id << ',' << row.step << ','
        << event_name(row.event) << ',' << format_optional(row.truth) << ','
        << format_optional(row.reported_trust) << ','
        << format_double(row.estimate_mean) << ','
        << format_double(row.estimate_variance) << ','
        << format_optional(row.band_lower) << ','
        << format_optional(row.band_upper) << '\n';
  }
  finish_write(out, path);
}

std::vector<ResultRow> load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open '" + path.string() + "'");
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError(path.string() + ": empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultHeader) {
    throw ValidationError(path.string() + ": schema mismatch, expected header '" +
                          kResultHeader + "'");
  }
  std::vector<ResultRow> rows;
  long row_number = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ++row_number;
    const std::string where = path.string() + ": row " + std::to_string(row_number);
    const auto fields = split_csv_line(line);
    if (fields.size() != 10) {
      throw ValidationError(where + ": expected 10 columns, got " +
                            std::to_string(fields.size()));
    }
    ResultRow row;
    row.participant_id = fields[0];
    row.trial_id = fields[1];
    row.step = static_cast<int>(parse_index(fields[2], where + ": step"));
    const auto kind = parse_event(fields[3]);
    if (!kind) {
      throw ValidationError(where + ": unknown event kind '" + fields[3] + "'");
    }
    row.event = *kind;
    auto opt = [&](const std::string& cell, const char* name) -> std::optional<double> {
      if (cell.empty()) return std::nullopt;
      return parse_double(cell, where + ": " + name);
    };
    row.truth = opt(fields[4], "truth");
    row.reported_trust = opt(fields[5], "reported_trust");
    row.estimate_mean = parse_double(fields[6], where + ": estimate_mean");
    row.estimate_variance = parse_double(fields[7], where + ": estimate_variance");
    row.band_lower = opt(fields[8], "band_lower");
    row.band_upper = opt(fields[9], "band_upper");
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_results(const FitResult& fit, const std::filesystem::path& path) {
  save_parameters(fit.params, path);
}

std::vector<ResultRow> make_result_rows(const TrialLog& log,
                                        std::span<const FilterState> trajectory) {
  if (trajectory.size() != log.steps.size()) {
    throw std::invalid_argument("trajectory length must match the log");
  }
  std::vector<ResultRow> rows;
  rows.reserve(log.steps.size());
  for (std::size_t t = 0; t < log.steps.size(); ++t) {
    ResultRow row;
    row.participant_id = log.participant_id;
    row.trial_id = log.trial_id;
    row.step = static_cast<int>(t);
    row.event = log.steps[t].event;
    row.reported_trust = log.steps[t].reported_trust;
    row.estimate_mean = trajectory[t].mean;
    row.estimate_variance = trajectory[t].variance;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> make_result_rows(std::span<const EventKind> events,
                                        const EnsembleResult& ensemble,
                                        const std::string& trial_id) {
  if (events.size() != ensemble.best_estimate.size()) {
    throw std::invalid_argument("event schedule must match the ensemble length");
  }
  std::vector<ResultRow> rows;
  rows.reserve(events.size());
  for (std::size_t t = 0; t < events.size(); ++t) {
    ResultRow row;
    row.trial_id = trial_id;
    row.step = static_cast<int>(t);
    row.event = events[t];
    row.truth = ensemble.truth[t];
    row.estimate_mean = ensemble.best_estimate[t];
    row.estimate_variance = ensemble.best_variance[t];
    row.band_lower = ensemble.band_lower[t];
    row.band_upper = ensemble.band_upper[t];
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace trustdyn
