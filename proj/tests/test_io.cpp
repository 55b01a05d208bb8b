#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "corpus.hpp"
#include "trustdyn/ensemble.hpp"
#include "trustdyn/errors.hpp"
#include "trustdyn/io.hpp"
#include "trustdyn/model.hpp"
#include "trustdyn/sysid.hpp"

using namespace trustdyn;
namespace fs = std::filesystem;

namespace {

const ModelParameters kTable1 = table1_parameters();

class TempDir {
 public:
  TempDir() {
    root_ = fs::temp_directory_path() /
            ("trustdyn_test_" + std::to_string(counter_++));
    fs::create_directories(root_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(root_, ec);
  }
  fs::path operator/(const std::string& name) const { return root_ / name; }
  const fs::path& path() const { return root_; }

 private:
  fs::path root_;
  static inline int counter_ = 0;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

constexpr const char* kLogHeader =
    "participant_id,trial_id,event_index,event_type,reported_trust,phi,pi,upsilon\n";

}  // namespace

TEST_CASE("scenario loading") {
  TempDir dir;
  SUBCASE("minimal valid file") {
    write_text(dir / "s.json", R"({"trials": [["true_alarm"]]})");
    const Scenario s = load_scenario(dir / "s.json");
    REQUIRE(s.trials.size() == 1);
    REQUIRE(s.trials[0].size() == 1);
    CHECK(s.trials[0][0] == EventKind::TrueAlarm);
    CHECK(s.initial_trust == 50.0);
    CHECK(!s.params.has_value());
  }
  SUBCASE("object-form trials and initial trust") {
    write_text(dir / "s.json",
               R"({"initial_trust": 62.5,
                   "trials": [{"events": ["miss", "false_alarm"]}, ["true_alarm"]]})");
    const Scenario s = load_scenario(dir / "s.json");
    CHECK(s.initial_trust == 62.5);
    REQUIRE(s.trials.size() == 2);
    CHECK(s.trials[0][1] == EventKind::FalseAlarm);
  }
  SUBCASE("unknown event kinds are named with their path") {
    write_text(dir / "s.json",
               R"({"trials": [["true_alarm", "near_miss"]]})");
    const std::string message =
        message_of([&] { load_scenario(dir / "s.json"); });
    CHECK(message.find("trials[0].events[1]") != std::string::npos);
    CHECK(message.find("near_miss") != std::string::npos);
  }
  SUBCASE("unknown keys are rejected by name") {
    write_text(dir / "s.json", R"({"trials": [["miss"]], "speed": 3})");
    const std::string message =
        message_of([&] { load_scenario(dir / "s.json"); });
    CHECK(message.find("speed") != std::string::npos);
  }
  SUBCASE("parse errors carry the position") {
    write_text(dir / "s.json", "{\n  \"trials\": [[\n");
    const std::string message =
        message_of([&] { load_scenario(dir / "s.json"); });
    CHECK(message.find("line") != std::string::npos);
  }
  SUBCASE("empty trials rejected") {
    write_text(dir / "s.json", R"({"trials": []})");
    CHECK_THROWS_AS(load_scenario(dir / "s.json"), ValidationError);
    write_text(dir / "s2.json", R"({"trials": [[]]})");
    CHECK_THROWS_AS(load_scenario(dir / "s2.json"), ValidationError);
  }
  SUBCASE("the table1 preset resolves to the published values") {
    write_text(dir / "s.json",
               R"({"trials": [["true_alarm"]], "params": "table1"})");
    const Scenario s = load_scenario(dir / "s.json");
    REQUIRE(s.params.has_value());
    CHECK(s.params_ref == "table1");
    CHECK(s.params->a == 1.00);
    CHECK(s.params->b[0] == 0.224);
    CHECK(s.params->b[1] == -0.670);
    CHECK(s.params->b[2] == -0.798);
    CHECK(s.params->c[0] == 7.01e-3);
    CHECK(s.params->c[1] == 4.23e-3);
    CHECK(s.params->c[2] == 9.20e-3);
    CHECK(s.params->q == 0.26);
    CHECK(s.params->r[0] == 0.18);
    CHECK(s.params->r[1] == 0.07);
    CHECK(s.params->r[2] == 0.06);
  }
  SUBCASE("inline params with unknown keys rejected") {
    write_text(dir / "s.json",
               R"({"trials": [["miss"]],
                   "params": {"a": 1.0, "b": [0,0,0], "c": [1,1,1],
                              "q": 0.1, "r": [1,1,1], "bias": 2}})");
    const std::string message =
        message_of([&] { load_scenario(dir / "s.json"); });
    CHECK(message.find("bias") != std::string::npos);
  }
}

TEST_CASE("parameters files round-trip exactly") {
  TempDir dir;
  const fs::path path = dir / "params.json";
  save_parameters(kTable1, path);
  const ModelParameters loaded = load_parameters(path.string());
  CHECK(loaded.a == kTable1.a);
  CHECK(loaded.b == kTable1.b);
  CHECK(loaded.c == kTable1.c);
  CHECK(loaded.q == kTable1.q);
  CHECK(loaded.r == kTable1.r);
  REQUIRE(loaded.sem.has_value());
  CHECK(loaded.sem->a == kTable1.sem->a);
  CHECK(loaded.sem->b == kTable1.sem->b);
  CHECK(loaded.sem->c == kTable1.sem->c);

  CHECK_THROWS_AS(load_parameters("no_such_preset"), ValidationError);

  write_text(dir / "bad.json", R"({"a": 1.0, "b": [0,0,0], "q": 0.1, "r": [1,1,1]})");
  const std::string message =
      message_of([&] { load_parameters((dir / "bad.json").string()); });
  CHECK(message.find("'c'") != std::string::npos);

  write_text(dir / "neg.json",
             R"({"a": 1.0, "b": [0,0,0], "c": [1,1,1], "q": -0.1, "r": [1,1,1]})");
  CHECK_THROWS_AS(load_parameters((dir / "neg.json").string()), ValidationError);
}

TEST_CASE("trial logs round-trip through the tabular format") {
  TempDir dir;
  auto logs = trustdyn::testing::make_corpus(
      kTable1, trustdyn::testing::CorpusShape{6, 2, 12, true}, 77);
  logs[3].steps[4].observation.phi.reset();
  logs[3].steps[4].observation.upsilon.reset();
  logs[5].steps[0].reported_trust.reset();

  const fs::path path = dir / "logs.csv";
  write_trial_logs(logs, path);
  const auto loaded = load_trial_logs(path);
  REQUIRE(loaded.size() == logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    CHECK(loaded[i].participant_id == logs[i].participant_id);
    CHECK(loaded[i].trial_id == logs[i].trial_id);
    REQUIRE(loaded[i].steps.size() == logs[i].steps.size());
    for (std::size_t t = 0; t < logs[i].steps.size(); ++t) {
      CHECK(loaded[i].steps[t].event == logs[i].steps[t].event);
      CHECK(loaded[i].steps[t].reported_trust == logs[i].steps[t].reported_trust);
      for (int k = 0; k < 3; ++k) {
        CHECK(loaded[i].steps[t].observation.channel(k) ==
              logs[i].steps[t].observation.channel(k));
      }
    }
  }
}

TEST_CASE("trial log validation cites the offending row") {
  TempDir dir;
  SUBCASE("out-of-range reported trust") {
    std::string text = kLogHeader;
    for (int i = 0; i < 12; ++i) {
      const double trust = i == 6 ? 150.0 : 50.0;  // data row 7
      text += "p0,t0," + std::to_string(i) + ",true_alarm," +
              std::to_string(trust) + ",0.1,0.1,0.1\n";
    }
    write_text(dir / "logs.csv", text);
    const std::string message =
        message_of([&] { load_trial_logs(dir / "logs.csv"); });
    CHECK(message.find("row 7") != std::string::npos);
    CHECK(message.find("reported_trust") != std::string::npos);
  }
  SUBCASE("duplicated event index breaks contiguity") {
    std::string text = kLogHeader;
    text += "p0,t0,0,true_alarm,50,0.1,0.1,0.1\n";
    text += "p0,t0,1,miss,50,0.1,0.1,0.1\n";
    text += "p0,t0,1,miss,50,0.1,0.1,0.1\n";
    write_text(dir / "logs.csv", text);
    const std::string message =
        message_of([&] { load_trial_logs(dir / "logs.csv"); });
    CHECK(message.find("event_index") != std::string::npos);
  }
  SUBCASE("gap in event indices") {
    std::string text = kLogHeader;
    text += "p0,t0,0,true_alarm,50,0.1,0.1,0.1\n";
    text += "p0,t0,2,miss,50,0.1,0.1,0.1\n";
    write_text(dir / "logs.csv", text);
    CHECK_THROWS_AS(load_trial_logs(dir / "logs.csv"), ValidationError);
  }
  SUBCASE("schema mismatch") {
    write_text(dir / "logs.csv", "participant,trial,idx\np0,t0,0\n");
    CHECK_THROWS_AS(load_trial_logs(dir / "logs.csv"), ValidationError);
  }
  SUBCASE("unknown event type") {
    std::string text = kLogHeader;
    text += "p0,t0,0,near_miss,50,0.1,0.1,0.1\n";
    write_text(dir / "logs.csv", text);
    const std::string message =
        message_of([&] { load_trial_logs(dir / "logs.csv"); });
    CHECK(message.find("near_miss") != std::string::npos);
  }
  SUBCASE("missing file and empty directory") {
    CHECK_THROWS_AS(load_trial_logs(dir / "nope.csv"), ValidationError);
    fs::create_directories(dir / "empty");
    CHECK_THROWS_AS(load_trial_logs(dir / "empty"), ValidationError);
  }
}

TEST_CASE("logs load from a directory of files") {
  TempDir dir;
  fs::create_directories(dir / "corpus");
  std::string a = kLogHeader;
  a += "p0,t0,0,true_alarm,50,0.1,0.1,0.1\n";
  a += "p0,t0,1,miss,49,0.1,0.1,0.1\n";
  std::string b = kLogHeader;
  b += "p1,t0,0,false_alarm,60,,0.2,\n";  // missing phi and upsilon
  write_text(dir / "corpus" / "a.csv", a);
  write_text(dir / "corpus" / "b.csv", b);
  const auto logs = load_trial_logs(dir / "corpus");
  REQUIRE(logs.size() == 2);
  CHECK(logs[0].participant_id == "p0");
  CHECK(logs[0].steps.size() == 2);
  CHECK(logs[1].participant_id == "p1");
  CHECK(!logs[1].steps[0].observation.phi.has_value());
  CHECK(logs[1].steps[0].observation.pi == 0.2);
  CHECK(!logs[1].steps[0].observation.upsilon.has_value());
}

TEST_CASE("result tables round-trip") {
  TempDir dir;
  std::vector<ResultRow> rows;
  RandomStream stream(55);
  for (int t = 0; t < 24; ++t) {
    ResultRow row;
    row.participant_id = "p1";
    row.trial_id = t < 12 ? "t0" : "t1";
    row.step = t % 12;
    row.event = kAllEvents[stream.next_u64() % 3];
    if (t % 3 != 0) row.truth = stream.uniform(1.0, 100.0);
    if (t % 2 == 0) row.reported_trust = stream.uniform(1.0, 100.0);
    row.estimate_mean = stream.uniform(1.0, 100.0);
    row.estimate_variance = stream.uniform(0.0, 50.0);
    if (t % 4 != 1) {
      row.band_lower = row.estimate_mean - stream.uniform(0.0, 5.0);
      row.band_upper = row.estimate_mean + stream.uniform(0.0, 5.0);
    }
    rows.push_back(row);
  }
  const fs::path path = dir / "results.csv";
  write_results(rows, path);
  const auto loaded = load_results(path);
  REQUIRE(loaded.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(loaded[i].participant_id == rows[i].participant_id);
    CHECK(loaded[i].trial_id == rows[i].trial_id);
    CHECK(loaded[i].step == rows[i].step);
    CHECK(loaded[i].event == rows[i].event);
    CHECK(loaded[i].truth == rows[i].truth);
    CHECK(loaded[i].reported_trust == rows[i].reported_trust);
    CHECK(loaded[i].estimate_mean == rows[i].estimate_mean);
    CHECK(loaded[i].estimate_variance == rows[i].estimate_variance);
    CHECK(loaded[i].band_lower == rows[i].band_lower);
    CHECK(loaded[i].band_upper == rows[i].band_upper);
  }
}

TEST_CASE("ensemble summaries produce one row per step") {
  TempDir dir;
  const std::vector<EventKind> events(12, EventKind::TrueAlarm);
  const EnsembleResult ensemble =
      run_ensemble(kTable1, FilterConfig{50.0, 1.0}, events, 50.0, 10, 3);
  const auto rows = make_result_rows(events, ensemble, "t0");
  REQUIRE(rows.size() == 12);
  CHECK(rows[0].truth.has_value());
  CHECK(rows[0].band_lower.has_value());

  const fs::path path = dir / "bands.csv";
  write_results(rows, path);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 13);  // header + 12 data rows

  const auto loaded = load_results(path);
  REQUIRE(loaded.size() == 12);
  for (std::size_t t = 0; t < 12; ++t) {
    CHECK(*loaded[t].band_lower <= loaded[t].estimate_mean);
    CHECK(loaded[t].estimate_mean <= *loaded[t].band_upper);
  }
}

TEST_CASE("a fit result writes a loadable parameters file") {
  TempDir dir;
  const auto logs = trustdyn::testing::make_corpus(
      kTable1, trustdyn::testing::CorpusShape{10, 2, 12, true}, 88);
  const FitResult fit = fit_all(logs);
  const fs::path path = dir / "fitted.json";
  write_results(fit, path);
  const ModelParameters loaded = load_parameters(path.string());
  CHECK(loaded.a == fit.params.a);
  CHECK(loaded.b == fit.params.b);
  CHECK(loaded.c == fit.params.c);
  CHECK(loaded.q == fit.params.q);
  CHECK(loaded.r == fit.params.r);
  REQUIRE(loaded.sem.has_value());
  CHECK(loaded.sem->b == fit.params.sem->b);
}

TEST_CASE("unwritable paths are data errors") {
  CHECK_THROWS_AS(save_parameters(kTable1, "/no/such/dir/params.json"),
                  ValidationError);
  CHECK_THROWS_AS(write_trial_logs({}, "/no/such/dir/logs.csv"), ValidationError);
}

TEST_CASE("run config validation") {
  RunConfig config;
  CHECK_NOTHROW(config.validate());
  config.n_runs = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config.n_runs = 1;
  config.filter.initial_variance = 0.0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}
