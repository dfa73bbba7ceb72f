#include <benchmark/benchmark.h>

#include "eqloop/chen.hpp"
#include "eqloop/diffeology.hpp"
#include "eqloop/random.hpp"

using namespace eqloop;

namespace {

void BM_HeatKernelSphere(benchmark::State& state) {
  Sphere S;
  auto rng = make_rng(1);
  const Ambient x = S.random_point(rng), y = S.random_point(rng);
  const double t = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(S.heat_kernel(t, x, y));
}
BENCHMARK(BM_HeatKernelSphere)->Arg(1)->Arg(16)->Arg(256);

void BM_HeatKernelTorus(benchmark::State& state) {
  Torus T;
  auto rng = make_rng(1);
  const Ambient x = T.random_point(rng), y = T.random_point(rng);
  const double t = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(T.heat_kernel(t, x, y));
}
BENCHMARK(BM_HeatKernelTorus)->Arg(1)->Arg(256);

void BM_SampleLoop(benchmark::State& state, const char* name) {
  const ManifoldPtr m = make_manifold(name);
  const int n = static_cast<int>(state.range(0));
  std::uint64_t i = 0;
  for (auto _ : state) {
    auto rng = make_rng(replica_seed(3, i++));
    benchmark::DoNotOptimize(sample_loop(*m, n, rng));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK_CAPTURE(BM_SampleLoop, t2, "t2")->Arg(256)->Arg(1024);
BENCHMARK_CAPTURE(BM_SampleLoop, s2, "s2")->Arg(256);

void BM_Convolve(benchmark::State& state) {
  Torus T;
  auto rng = make_rng(4);
  const Loop g = sample_loop(T, 1024, rng);
  const int N = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(convolve(T, g, N));
}
BENCHMARK(BM_Convolve)->Arg(32)->Arg(128);

void BM_SigmaEval(benchmark::State& state) {
  Torus T;
  const int n = static_cast<int>(state.range(0));
  const Loop g = smooth_test_loop(T, "winding", n);
  FormWord w({form_catalog(T, "omega_t2"), form_catalog(T, "eta_t2")});
  const NamedField v = field_catalog(T, "wave1");
  LoopField X(g.size());
  for (long j = 0; j < g.size(); ++j) X[j] = T.tangent_project(g[j], v(static_cast<double>(j) / n, g[j]));
  for (auto _ : state) benchmark::DoNotOptimize(sigma_eval(T, w, g, {X}));
  state.SetComplexityN(n);
}
BENCHMARK(BM_SigmaEval)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

}  // namespace
BENCHMARK_MAIN();
