#include <benchmark/benchmark.h>

#include <vector>

#include "trustdyn/ensemble.hpp"
#include "trustdyn/filter.hpp"
#include "trustdyn/model.hpp"
#include "trustdyn/rng.hpp"
#include "trustdyn/sysid.hpp"

using namespace trustdyn;

namespace {

std::vector<EventKind> schedule(int n) {
  RandomStream stream(99);
  std::vector<EventKind> events;
  for (int i = 0; i < n; ++i) events.push_back(kAllEvents[stream.next_u64() % 3]);
  return events;
}

std::vector<TrialLog> corpus(int participants) {
  const ModelParameters p = table1_parameters();
  RandomStream meta(5);
  std::vector<TrialLog> logs;
  for (int i = 0; i < participants; ++i) {
    for (int j = 0; j < 2; ++j) {
      TrialLog log = simulate_trial(p, meta.uniform(20, 80), schedule(12),
                                    substream_seed(1, i * 2 + j), true);
      log.participant_id = "p" + std::to_string(i);
      log.trial_id = "t" + std::to_string(j);
      logs.push_back(std::move(log));
    }
  }
  return logs;
}

}  // namespace

static void BM_FilterStep(benchmark::State& state) {
  const ModelParameters p = table1_parameters();
  const ObservationVector obs = emit_observation(p, TrustState{50.0}, {0, 0, 0});
  FilterState belief{50.0, 225.0};
  for (auto _ : state) {
    belief = filter_step(p, belief, EventKind::TrueAlarm, obs);
    benchmark::DoNotOptimize(belief);
  }
}
BENCHMARK(BM_FilterStep);

static void BM_SimulateTrial(benchmark::State& state) {
  const ModelParameters p = table1_parameters();
  const auto events = schedule(static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto log = simulate_trial(p, 50.0, events, seed++, true);
    benchmark::DoNotOptimize(log);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SimulateTrial)->Range(12, 12 << 6)->Complexity();

static void BM_FilterTrajectory(benchmark::State& state) {
  const ModelParameters p = table1_parameters();
  const auto log = simulate_trial(p, 50.0, schedule(static_cast<int>(state.range(0))), 3, true);
  for (auto _ : state) {
    auto states = filter_trajectory(p, FilterConfig{}, log);
    benchmark::DoNotOptimize(states);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FilterTrajectory)->Range(12, 12 << 6)->Complexity();

static void BM_RunEnsemble(benchmark::State& state) {
  const ModelParameters p = table1_parameters();
  const auto events = schedule(12);
  EnsembleOptions options;
  options.n_runs = static_cast<int>(state.range(0));
  options.seed = 7;
  for (auto _ : state) {
    auto result = run_ensemble(p, FilterConfig{50.0, 1.0}, events, 50.0, options);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_RunEnsemble)->Arg(100);

static void BM_SteadyStateVariance(benchmark::State& state) {
  const ModelParameters p = table1_parameters();
  for (auto _ : state) {
    benchmark::DoNotOptimize(steady_state_variance(p));
  }
}
BENCHMARK(BM_SteadyStateVariance);

static void BM_FitAll(benchmark::State& state) {
  const auto logs = corpus(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto fit = fit_all(logs);
    benchmark::DoNotOptimize(fit);
  }
}
BENCHMARK(BM_FitAll)->Arg(80);

BENCHMARK_MAIN();
