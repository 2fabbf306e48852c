#include <doctest.h>

#include "dav/parallel.hpp"
#include "dav/rng.hpp"

using namespace dav;

TEST_CASE("counter rng is a pure function of its key") {
  CounterRng a(42, "stage", 7);
  CounterRng b(42, "stage", 7);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  CounterRng c(42, "stage", 8);
  CounterRng d(42, "other", 7);
  CounterRng e(43, "stage", 7);
  CounterRng f(42, "stage", 7);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) {
    std::uint64_t v = f.next_u64();
    all_equal = all_equal && (c.next_u64() == v) && (d.next_u64() == v) && (e.next_u64() == v);
  }
  CHECK_FALSE(all_equal);
}

TEST_CASE("uniform01 lands in [0,1) and looks uniform") {
  CounterRng rng(1, "uniform");
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("unit vectors are unit") {
  CounterRng rng(2, "sphere");
  Vec3 mean = Vec3::Zero();
  for (int i = 0; i < 2000; ++i) {
    Vec3 v = rng.unit_vector();
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
    mean += v;
  }
  CHECK(mean.norm() / 2000 < 0.05);  // no direction bias
}

TEST_CASE("parallel_for output does not depend on the worker count") {
  const std::size_t n = 10000;
  auto run = [&](int workers) {
    std::vector<double> out(n);
    parallel_for(n, workers, [&](std::size_t i) {
      CounterRng rng(99, "partest", i);
      out[i] = rng.uniform01();
    });
    return out;
  };
  auto w1 = run(1);
  auto w3 = run(3);
  auto w8 = run(8);
  CHECK(w1 == w3);
  CHECK(w1 == w8);
}

TEST_CASE("parallel_chunks propagates errors") {
  CHECK_THROWS_AS(parallel_for(100, 4,
                               [](std::size_t i) {
                                 if (i == 57) throw Error("boom");
                               }),
                  Error);
}
