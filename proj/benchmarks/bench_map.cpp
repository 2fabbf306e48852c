#include <benchmark/benchmark.h>

#include "dav/damap.hpp"
#include "dav/rng.hpp"

namespace {

dav::DAMap make_map(int perturbations) {
  dav::LinearAnosov a =
      dav::analyze_linear(dav::IntMatrix3::from_rows({3, 2, 1, 2, 2, 1, 1, 1, 1}));
  std::vector<dav::Perturbation> ps;
  if (perturbations >= 1) {
    dav::ShearPerturbation s;
    s.target = 0;
    s.frequency = Eigen::Vector3i(0, 1, 0);
    s.amplitude = 0.05;
    ps.push_back(s);
  }
  if (perturbations >= 2) {
    dav::TwistPerturbation t;
    t.center = dav::wrap(dav::Vec3(0.5, 0.5, 0.5));
    t.radius = 0.2;
    t.max_angle = 0.3;
    ps.push_back(t);
  }
  return dav::DAMap(std::move(a), std::move(ps));
}

void BM_Apply(benchmark::State& state) {
  dav::DAMap f = make_map(static_cast<int>(state.range(0)));
  dav::TorusPoint x = dav::wrap(dav::Vec3(0.123, 0.456, 0.789));
  for (auto _ : state) {
    x = f.apply(x);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_Apply)->Arg(0)->Arg(1)->Arg(2);

void BM_Derivative(benchmark::State& state) {
  dav::DAMap f = make_map(static_cast<int>(state.range(0)));
  dav::TorusPoint x = dav::wrap(dav::Vec3(0.123, 0.456, 0.789));
  for (auto _ : state) {
    dav::Mat3 d = f.derivative(x);
    benchmark::DoNotOptimize(d);
    x = f.apply(x);
  }
}
BENCHMARK(BM_Derivative)->Arg(0)->Arg(1)->Arg(2);

void BM_Invert(benchmark::State& state) {
  dav::DAMap f = make_map(static_cast<int>(state.range(0)));
  dav::TorusPoint x = dav::wrap(dav::Vec3(0.123, 0.456, 0.789));
  for (auto _ : state) {
    x = f.invert(x);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(BM_Invert)->Arg(0)->Arg(1)->Arg(2);

}  // namespace

BENCHMARK_MAIN();
