#include <benchmark/benchmark.h>

#include "dav/grid.hpp"
#include "dav/rng.hpp"

namespace {

void BM_SampleLinear(benchmark::State& state) {
  dav::GridField g(64, 3);
  dav::CounterRng rng(1, "bench_grid");
  for (auto& v : g.data()) v = rng.uniform01();
  dav::TorusPoint p = dav::wrap(dav::Vec3(0.123, 0.456, 0.789));
  for (auto _ : state) {
    dav::Vec3 v = g.sample_vec3(p, 1);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_SampleLinear);

void BM_SampleCubic(benchmark::State& state) {
  dav::GridField g(64, 3);
  dav::CounterRng rng(1, "bench_grid");
  for (auto& v : g.data()) v = rng.uniform01();
  dav::TorusPoint p = dav::wrap(dav::Vec3(0.123, 0.456, 0.789));
  for (auto _ : state) {
    dav::Vec3 v = g.sample_vec3(p, 3);
    benchmark::DoNotOptimize(v);
  }
}
BENCHMARK(BM_SampleCubic);

}  // namespace
