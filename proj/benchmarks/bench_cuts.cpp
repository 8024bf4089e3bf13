#include <benchmark/benchmark.h>

#include "dtzo/cuts.hpp"
#include "dtzo/penalty.hpp"
#include "dtzo/rng.hpp"

namespace {

using namespace dtzo;

std::vector<QuadraticCut> random_pool(int n_cuts, int dim,
                                      std::uint64_t seed) {
  RngStream rng(seed, StreamRole::test, 0, purpose::generic);
  std::vector<QuadraticCut> pool;
  for (int i = 0; i < n_cuts; ++i) {
    QuadraticCut c;
    c.layer = CutLayer::outer;
    c.id = i;
    c.a = rng.gaussian_vec(dim);
    c.b = rng.gaussian_vec(dim);
    c.e = rng.gaussian();
    pool.push_back(std::move(c));
  }
  return pool;
}

void BM_cut_pool_eval(benchmark::State& state) {
  const int dim = 32;
  auto pool = random_pool(static_cast<int>(state.range(0)), dim, 11);
  RngStream rng(12, StreamRole::test, 0, purpose::generic);
  Vec v = rng.gaussian_vec(dim);
  for (auto _ : state) {
    double s = 0.0;
    for (const auto& c : pool) s += c.eval(v);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_cut_pool_eval)->RangeMultiplier(4)->Range(4, 1024);

void BM_grad_o(benchmark::State& state) {
  Dims dims{2, 4, 3, 4};
  auto pool = random_pool(static_cast<int>(state.range(0)),
                          dims.outer_cut_dim(), 13);
  SystemState st = SystemState::zeros(dims);
  PenaltyConfig pcfg = PenaltyConfig::defaults(dims.n_workers);
  for (auto _ : state) {
    OuterGrad g = grad_o(pool, dims, st, pcfg);
    benchmark::DoNotOptimize(g.z1.data());
  }
}
BENCHMARK(BM_grad_o)->RangeMultiplier(4)->Range(4, 256);

}  // namespace

BENCHMARK_MAIN();
