#include <benchmark/benchmark.h>

#include "dav/cocycle.hpp"

namespace {

dav::DAMap shear_map(double eps) {
  dav::LinearAnosov a =
      dav::analyze_linear(dav::IntMatrix3::from_rows({3, 2, 1, 2, 2, 1, 1, 1, 1}));
  dav::ShearPerturbation s;
  s.target = 0;
  s.frequency = Eigen::Vector3i(0, 1, 0);
  s.amplitude = eps;
  return dav::DAMap(std::move(a), {s});
}

// the hot loop of every exponent estimate: orbit advance + QR accumulation
void BM_FiniteTimeExponents(benchmark::State& state) {
  dav::DAMap f = shear_map(0.05);
  dav::TorusPoint x = dav::wrap(dav::Vec3(0.2, 0.4, 0.8));
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) {
    dav::ExponentTriple t = dav::finite_time_exponents(f, x, n, 0);
    benchmark::DoNotOptimize(t);
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_FiniteTimeExponents)->Arg(1000)->Arg(10000);

}  // namespace
