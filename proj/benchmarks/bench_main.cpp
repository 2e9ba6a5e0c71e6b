#include <benchmark/benchmark.h>

#include "rdslab/admissible.hpp"
#include "rdslab/cocycle.hpp"
#include "rdslab/curves.hpp"
#include "rdslab/seminorm.hpp"

using namespace rdslab;

static void BM_CocycleTip(benchmark::State& state) {
  DrivingMeasure mu = make_ab_system(0.01);
  Xoshiro256pp rng(derive_seed(1, "bench"));
  Word w = mu.sample_word(size_t(state.range(0)), rng);
  TorusPoint p(0.3, 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(cocycle_tip(mu, w, p));
}
BENCHMARK(BM_CocycleTip)->Arg(10)->Arg(25)->Arg(100);

static void BM_BallMass(benchmark::State& state) {
  Xoshiro256pp rng(derive_seed(1, "cloud"));
  PointCloudMeasure m;
  for (int i = 0; i < state.range(0); ++i)
    m.atoms.push_back({TorusPoint(rng.next_double(), rng.next_double()), 1.0});
  SpatialHash h(m, 0.05);
  for (auto _ : state)
    benchmark::DoNotOptimize(h.ball_mass(TorusPoint(0.5, 0.5), 0.05));
}
BENCHMARK(BM_BallMass)->Arg(10000)->Arg(1000000);

static void BM_PushCurve(benchmark::State& state) {
  DrivingMeasure mu = make_ab_system(0.01);
  Curve c = make_circle(Vec2{0.5, 0.5}, 0.1, 1e-3);
  Xoshiro256pp rng(derive_seed(1, "push"));
  Word w = mu.sample_word(size_t(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(push_curve(mu, w, c));
}
BENCHMARK(BM_PushCurve)->Arg(1)->Arg(5);

static void BM_RhoNorm(benchmark::State& state) {
  Xoshiro256pp rng(derive_seed(1, "norm"));
  PointCloudMeasure m;
  for (int i = 0; i < 100000; ++i)
    m.atoms.push_back({TorusPoint(rng.next_double(), rng.next_double()), 1e-5});
  for (auto _ : state) benchmark::DoNotOptimize(rho_norm(m, 0.05, 4));
}
BENCHMARK(BM_RhoNorm);

BENCHMARK_MAIN();
