#include "coulomb/convolution.hpp"
#include "coulomb/energy.hpp"
#include "coulomb/equilibrium.hpp"
#include "coulomb/sampler.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace coulomb;

namespace {

std::vector<Vec> gaussian_points(int n, int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 0.4);
  std::vector<Vec> x;
  for (int i = 0; i < n; ++i) x.emplace_back(nd(rng), nd(rng), d == 3 ? nd(rng) : 0.0);
  return x;
}

void BM_Hamiltonian(benchmark::State& state) {
  const int N = int(state.range(0));
  const auto V = quadratic_potential(2, 1.0);
  const PointConfiguration X(2, gaussian_points(N, 2, 1));
  for (auto _ : state) benchmark::DoNotOptimize(hamiltonian(X, *V));
  state.SetComplexityN(N);
}
BENCHMARK(BM_Hamiltonian)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oNSquared);

void BM_NearestNeighbourCells(benchmark::State& state) {
  const int N = int(state.range(0));
  const auto x = gaussian_points(N, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(nearest_distance_cells(x, 3));
  state.SetComplexityN(N);
}
BENCHMARK(BM_NearestNeighbourCells)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oN);

void BM_Convolver(benchmark::State& state) {
  const int n = int(state.range(0));
  const GridSpec g = GridSpec::cube(2, 1.0, n);
  const CoulombConvolver conv(g);
  std::vector<double> f(g.size(), 1.0), out(g.size());
  for (auto _ : state) {
    conv.apply(f.data(), out.data());
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_Convolver)->Arg(128)->Arg(256)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_EquilibriumSolve(benchmark::State& state) {
  const auto V = quadratic_potential(2, 1.0);
  const double theta = 512.0;
  const GridSpec g = default_box(*V, theta, int(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_mu_theta(*V, theta, g).residual);
}
BENCHMARK(BM_EquilibriumSolve)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_GinibreSample(benchmark::State& state) {
  const int N = int(state.range(0));
  Rng rng = make_rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(ginibre_sample(N, rng).size());
}
BENCHMARK(BM_GinibreSample)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_MetropolisSweep(benchmark::State& state) {
  const int d = int(state.range(0)), N = int(state.range(1));
  TargetSpec t;
  t.kind = Target::gibbs_V;
  t.beta = 2.0;
  t.N = N;
  t.d = d;
  t.V = quadratic_potential(d, 1.0);
  Rng rng = make_rng(3, 0);
  ChainState s(t, initial_configuration(t, rng), make_rng(3, 1), 0.5 * std::pow(double(N), -1.0 / d));
  for (auto _ : state) benchmark::DoNotOptimize(s.sweep());
}
BENCHMARK(BM_MetropolisSweep)->Args({2, 64})->Args({2, 256})->Args({3, 64})->Args({3, 256})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
