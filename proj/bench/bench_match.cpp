// Serial reference vs OpenMP kernels for matching and aggregation.
//
//   ./bench_match --benchmark_filter=Match

#include <benchmark/benchmark.h>

#include "roadpop/batch.hpp"
#include "roadpop/export.hpp"
#include "roadpop/synth.hpp"

using namespace roadpop;

namespace {

struct Workload {
  RoadNetwork net;
  SynthOutput data;
  std::vector<ActivityUsage> usage;
};

const Workload& workload() {
  static const Workload w = [] {
    Workload w;
    w.net = make_grid_network({.rows = 31, .cols = 31, .spacing_m = 150.0});
    SynthParams p;
    p.users = 100;
    p.activities = 10;
    p.points_per_track = 100;
    p.seed = 7;
    w.data = synthesize(w.net, p);
    const auto matched = match_tracks_serial(w.data.tracks, w.net, MatcherConfig{});
    for (std::size_t i = 0; i < matched.size(); ++i) {
      const auto& t = w.data.tracks[i];
      w.usage.push_back(to_usage(w.net, {matched[i], t.user_id, t.kind, assign_period(t, PeriodScheme{})}));
    }
    return w;
  }();
  return w;
}

void BM_MatchSerial(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(match_tracks_serial(w.data.tracks, w.net, MatcherConfig{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.data.tracks.size()));
}

void BM_MatchParallel(benchmark::State& state) {
  const auto& w = workload();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(match_tracks_parallel(w.data.tracks, w.net, MatcherConfig{}, workers));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.data.tracks.size()));
}

void BM_AccumulateSerial(benchmark::State& state) {
  const auto& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(accumulate_serial(w.usage));
}

void BM_AccumulateParallel(benchmark::State& state) {
  const auto& w = workload();
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(accumulate_parallel(w.usage, workers));
}

}  // namespace

BENCHMARK(BM_MatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatchParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AccumulateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AccumulateParallel)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
