#include <benchmark/benchmark.h>

#include "dtzo/rng.hpp"
#include "dtzo/zo_grad.hpp"

namespace {

using namespace dtzo;

double sphere(const Vec& x) { return norm_sq(x); }

void BM_two_point(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  RngStream rng(3, StreamRole::test, 0, purpose::generic);
  Vec x = rng.gaussian_vec(dim);
  for (auto _ : state) {
    Vec u = rng.gaussian_vec(dim);
    Vec g = two_point_estimate(sphere, x, 1e-3, u);
    benchmark::DoNotOptimize(g.data());
  }
}
BENCHMARK(BM_two_point)->RangeMultiplier(4)->Range(4, 256);

void BM_multi_point(benchmark::State& state) {
  const int dim = 32;
  RngStream rng(4, StreamRole::test, 0, purpose::generic);
  Vec x = rng.gaussian_vec(dim);
  SmoothingConfig cfg;
  cfg.batch = static_cast<int>(state.range(0));
  for (auto _ : state) {
    GradEstimate est = multi_point_estimate(sphere, x, cfg, rng);
    benchmark::DoNotOptimize(est.g.data());
  }
  state.SetItemsProcessed(state.iterations() * (state.range(0) + 1));
}
BENCHMARK(BM_multi_point)->RangeMultiplier(4)->Range(1, 256);

}  // namespace
