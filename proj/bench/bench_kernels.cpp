// Serial references against the OpenMP kernels.

#include <benchmark/benchmark.h>

#include <cmath>
#include <map>

#include "geosep/grid.hpp"
#include "geosep/sep.hpp"
#include "geosep/walk.hpp"

using namespace geosep;

namespace {

const PointCloud& sphere_cloud(std::size_t N) {
  static std::map<std::size_t, PointCloud> cache;
  auto it = cache.find(N);
  if (it == cache.end()) it = cache.emplace(N, sample_cloud(Manifold::sphere2(), N, 1)).first;
  return it->second;
}

double bandwidth(std::size_t N) { return std::pow(double(N), -1.0 / 8); }

template <bool Parallel>
void BM_build_weights(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const auto& cloud = sphere_cloud(N);
  for (auto _ : state) {
    auto g = Parallel ? build_weights(cloud, bandwidth(N), default_kernel())
                      : build_weights_serial(cloud, bandwidth(N), default_kernel());
    benchmark::DoNotOptimize(g.edges.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(N));
}

template <bool Parallel>
void BM_laplacian_apply(benchmark::State& state) {
  const auto N = static_cast<std::size_t>(state.range(0));
  const auto g = normalize(build_weights(sphere_cloud(N), bandwidth(N), default_kernel()));
  const auto phi = evaluate(g.cloud, find_test_function(Manifold::sphere2(), "Y2,1").eval);
  for (auto _ : state) {
    auto out = Parallel ? graph_laplacian_apply(g, phi) : graph_laplacian_apply_serial(g, phi);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["edges"] = static_cast<double>(g.edges.size());
}

template <bool Parallel>
void BM_walk_ensemble(benchmark::State& state) {
  const Manifold s = Manifold::sphere2();
  const auto replicas = static_cast<std::size_t>(state.range(0));
  const std::vector<TestFunction> obs{find_test_function(s, "Y1,0")};
  const std::vector<double> times{0.25, 0.5, 1.0};
  const Point p0{{0, 0, 1}};
  const auto step = uniform_sphere_step(s);
  for (auto _ : state) {
    auto st = Parallel ? walk_ensemble(s, p0, 50.0, step, times, obs, replicas, 3)
                       : walk_ensemble_serial(s, p0, 50.0, step, times, obs, replicas, 3);
    benchmark::DoNotOptimize(st.mean.data());
  }
}

template <bool Parallel>
void BM_sep_replicas(benchmark::State& state) {
  const auto replicas = static_cast<std::size_t>(state.range(0));
  const auto r = regular_circle_cloud(256);
  const EdgeTable table(r.grid);
  const TestFunction phi = find_test_function(Manifold::circle(), "cos1");
  const std::vector<SiteObservable> obs{site_observable(r.grid.cloud, phi), site_generator(r.grid, phi)};
  SepOptions opt;
  opt.t_end = 0.01;
  opt.record_times = {0.0, 0.005, 0.01};
  auto init = [&](Rng& rng) { return init_bernoulli(r.grid.cloud, [](const Point&) { return 0.5; }, rng); };
  for (auto _ : state) {
    auto runs = Parallel ? run_replicas(table, init, obs, opt, replicas, 4)
                         : run_replicas_serial(table, init, obs, opt, replicas, 4);
    benchmark::DoNotOptimize(runs.data());
  }
}

}  // namespace

BENCHMARK(BM_build_weights<false>)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_build_weights<true>)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_laplacian_apply<false>)->Arg(1024)->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_laplacian_apply<true>)->Arg(1024)->Arg(4096)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_walk_ensemble<false>)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_walk_ensemble<true>)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sep_replicas<false>)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sep_replicas<true>)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
