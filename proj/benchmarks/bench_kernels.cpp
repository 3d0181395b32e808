// Per-node kernels: propagation, the sign projector and one subspace pair.

#include "dichotomy/config.hpp"
#include "dichotomy/hyperbolic.hpp"
#include "dichotomy/index.hpp"
#include "dichotomy/propagation.hpp"
#include "dichotomy/subspaces.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace dichotomy;

namespace {

FamilyPtr builtin(const char* name) { return build_family(builtin_family_config(name)); }

Matrix random_hyperbolic(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix v = Matrix::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) v(i, j) += 0.3 * g(rng);
  Vector mu(d);
  for (int i = 0; i < d; ++i) mu(i) = (i % 2 ? 1.0 : -1.0) * (0.5 + i);
  return v * mu.asDiagonal() * v.inverse();
}

}  // namespace

static void BM_Transition(benchmark::State& state) {
  const FamilyPtr f = builtin("paper-sec4-BC");
  const double tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(transition(*f, {1.0, 0}, 6.0, 0.0, tol));
}
BENCHMARK(BM_Transition)->Arg(6)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMicrosecond);

static void BM_TransportStableSeed(benchmark::State& state) {
  const FamilyPtr f = builtin("paper-sec4-exBC");
  const double reortho = 1.0 / static_cast<double>(state.range(0));
  Vector v(2);
  v << 1.0, 0.0;
  const Frame seed = Frame::from_vector(v);
  for (auto _ : state) benchmark::DoNotOptimize(transport_frame(*f, {2.0, 0}, seed, 12.0, 0.0, reortho));
}
BENCHMARK(BM_TransportStableSeed)->Arg(1)->Arg(4)->Arg(16)->Unit(benchmark::kMicrosecond);

static void BM_SignProjector(benchmark::State& state) {
  const Matrix a = random_hyperbolic(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(matrix_sign_projector(a));
}
BENCHMARK(BM_SignProjector)->RangeMultiplier(2)->Range(2, 32);

static void BM_EvansAtNode(benchmark::State& state) {
  const FamilyPtr f = builtin("poschl-teller");
  const Numerics n{};
  for (auto _ : state) benchmark::DoNotOptimize(evans_determinant(*f, {0.8, 0}, n));
}
BENCHMARK(BM_EvansAtNode)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
