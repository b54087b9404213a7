#include <benchmark/benchmark.h>

#include "meshtrack/error_score.hpp"
#include "meshtrack/flow_solver.hpp"
#include "meshtrack/rng.hpp"
#include "meshtrack/synth.hpp"

using namespace meshtrack;

namespace {

Image shifted_texture(int size, double dx) {
  const Image tex = procedural_texture(size + 8, size + 8, 42);
  Image out(size, size);
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) out.at(x, y) = float(tex.sample(x + 4 + dx, y + 4));
  return out;
}

}  // namespace

static void BM_EstimateFlow(benchmark::State& state) {
  const int size = int(state.range(0));
  const Image a = shifted_texture(size, 0.0);
  const Image b = shifted_texture(size, 1.0);
  FlowSolverParams params;
  params.iterations = 60;
  params.warps = 2;
  for (auto _ : state) {
    FlowField flow = estimate_flow(a, b, params);
    benchmark::DoNotOptimize(flow.raw().data());
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_EstimateFlow)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

static void BM_ComposeFlow(benchmark::State& state) {
  const int size = int(state.range(0));
  FlowField a(size, size), b(size, size);
  Rng rng(1);
  for (float& v : a.raw()) v = float(rng.uniform(-2, 2));
  for (float& v : b.raw()) v = float(rng.uniform(-2, 2));
  for (auto _ : state) {
    FlowField out = compose_flow(a, b);
    benchmark::DoNotOptimize(out.raw().data());
  }
  state.SetItemsProcessed(state.iterations() * size * size);
}
BENCHMARK(BM_ComposeFlow)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_ErrorScore(benchmark::State& state) {
  const Image a = procedural_texture(64, 64, 3);
  const Image b = procedural_texture(64, 64, 4);
  Rng rng(5);
  for (auto _ : state) {
    const Vec2 x{rng.uniform(1, 62), rng.uniform(1, 62)};
    const Vec2 w{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    benchmark::DoNotOptimize(error_score(a, b, x, w));
  }
}
BENCHMARK(BM_ErrorScore);
