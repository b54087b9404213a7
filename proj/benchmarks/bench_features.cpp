#include <benchmark/benchmark.h>

#include "meshtrack/features.hpp"
#include "meshtrack/matching.hpp"
#include "meshtrack/synth.hpp"

using namespace meshtrack;

static void BM_DetectFeatures(benchmark::State& state) {
  const int size = int(state.range(0));
  const Image tex = procedural_texture(size, size, 9);
  std::size_t count = 0;
  for (auto _ : state) {
    const auto features = detect_features(tex);
    count = features.size();
    benchmark::DoNotOptimize(features.data());
  }
  state.counters["features"] = double(count);
}
BENCHMARK(BM_DetectFeatures)->Arg(128)->Arg(256)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_MatchFeatures(benchmark::State& state) {
  const int size = int(state.range(0));
  const Image a = procedural_texture(size, size, 10);
  const auto ref = detect_features(a);
  for (auto _ : state) {
    const auto raw = match_features(ref, ref, 0.8);
    benchmark::DoNotOptimize(raw.data());
  }
  state.counters["features"] = double(ref.size());
}
BENCHMARK(BM_MatchFeatures)->Arg(256)->Arg(500)->Unit(benchmark::kMillisecond);
