// Whole-space passes: aligned frame fields and the planar sign map.

#include "dichotomy/bifurcation.hpp"
#include "dichotomy/config.hpp"
#include "dichotomy/index.hpp"
#include "dichotomy/subspaces.hpp"

#include <benchmark/benchmark.h>

#include <numbers>

using namespace dichotomy;

static void BM_IntervalFrameField(benchmark::State& state) {
  const FamilyPtr f = build_family(builtin_family_config("paper-sec4-BC"));
  const ParameterSpace s =
      ParameterSpace::interval(0, std::numbers::pi, static_cast<std::size_t>(state.range(0)), {0, std::numbers::pi});
  const Numerics n{};
  for (auto _ : state) benchmark::DoNotOptimize(frame_field(*f, s, n));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IntervalFrameField)->Arg(45)->Arg(181)->Unit(benchmark::kMillisecond);

static void BM_CircleHolonomy(benchmark::State& state) {
  const FamilyPtr f = build_family(builtin_family_config("paper-sec4-exBC"));
  const ParameterSpace s = ParameterSpace::circle(static_cast<std::size_t>(state.range(0)), {std::numbers::pi});
  const Numerics n{};
  for (auto _ : state) {
    const FrameField field = frame_field(*f, s, n);
    benchmark::DoNotOptimize(index_report(*f, field, n));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CircleHolonomy)->Arg(360)->Arg(720)->Unit(benchmark::kMillisecond);

static void BM_SignMap(benchmark::State& state) {
  const FamilyPtr f = build_family(builtin_family_config("disc-radial"));
  GridSpec g;
  g.nx = g.ny = static_cast<std::size_t>(state.range(0));
  const ParameterSpace s = ParameterSpace::grid2d(g, {{0, 0}});
  Numerics n{};
  n.ode_tol = 1e-8;
  for (auto _ : state) benchmark::DoNotOptimize(sign_map_2d(*f, s, n));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}
BENCHMARK(BM_SignMap)->Arg(41)->Arg(101)->Unit(benchmark::kMillisecond);

static void BM_LabelSignMap(benchmark::State& state) {
  GridSpec g;
  g.nx = g.ny = static_cast<std::size_t>(state.range(0));
  const ParameterSpace s = ParameterSpace::grid2d(g, {{0, 0}});
  std::vector<int> signs(s.size());
  for (std::size_t u = 0; u < s.size(); ++u) {
    const ParameterValue& p = s.node(u);
    signs[u] = p.x * p.y > 0.05 ? 1 : (p.x * p.y < -0.05 ? -1 : 0);
  }
  for (auto _ : state) benchmark::DoNotOptimize(label_sign_map(s, signs));
}
BENCHMARK(BM_LabelSignMap)->Arg(101)->Arg(401)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
