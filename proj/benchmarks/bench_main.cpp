#include <benchmark/benchmark.h>

#include "cvcluster/analysis.hpp"
#include "cvcluster/chain.hpp"
#include "cvcluster/estimator.hpp"
#include "cvcluster/gaussian.hpp"
#include "cvcluster/pumpsynth.hpp"

using namespace cvc;

namespace {

const GaussianState& lossy_square(int n, int n_x) {
  static const GaussianState st = [&] {
    const PumpScheme s = square_scheme(n, n_x, 0.3);
    return apply_loss(evolve(vacuum(s.basis), s, 1.0), 0.9);
  }();
  return st;
}

void BM_Evolve191(benchmark::State& state) {
  const PumpScheme s = square_scheme(191, 11, 0.3);
  const GaussianState vac = vacuum(s.basis);
  for (auto _ : state) benchmark::DoNotOptimize(evolve(vac, s, 1.0));
}
BENCHMARK(BM_Evolve191)->Unit(benchmark::kMillisecond);

void BM_Sweep191(benchmark::State& state) {
  const PumpScheme s = square_scheme(191, 11, 0.3);
  const GaussianState& st = lossy_square(191, 11);
  const AdjacencyMatrix a = signed_expected_adjacency(s);
  const std::vector<double> grid = theta_grid(180);
  for (auto _ : state) benchmark::DoNotOptimize(nullifier_sweep(st.cov, a, grid));
}
BENCHMARK(BM_Sweep191)->Unit(benchmark::kMillisecond);

void BM_Extract191(benchmark::State& state) {
  const GaussianState& st = lossy_square(191, 11);
  for (auto _ : state) benchmark::DoNotOptimize(extract_AU(st.cov));
}
BENCHMARK(BM_Extract191)->Unit(benchmark::kMillisecond);

void BM_Accumulate191(benchmark::State& state) {
  const GaussianState& st = lossy_square(191, 11);
  WindowGenerator gen(st, kWindowBlock, ChainConfig{});
  Matrix block;
  gen.next_block(block);
  CovarianceAccumulator acc(gen.dimension());
  for (auto _ : state) acc.add_block(block);
  state.SetItemsProcessed(state.iterations() * block.rows());
}
BENCHMARK(BM_Accumulate191)->Unit(benchmark::kMillisecond);

void BM_Generate191(benchmark::State& state) {
  const GaussianState& st = lossy_square(191, 11);
  Matrix block;
  for (auto _ : state) {
    WindowGenerator gen(st, kWindowBlock, ChainConfig{});
    gen.next_block(block);
  }
  state.SetItemsProcessed(state.iterations() * kWindowBlock);
}
BENCHMARK(BM_Generate191)->Unit(benchmark::kMillisecond);

void BM_Project25(benchmark::State& state) {
  const PumpScheme s = square_scheme(25, 5, 0.17);
  const GaussianState st = apply_loss(evolve(vacuum(s.basis), s, 1.0), 0.9);
  ChainConfig chain;
  WindowGenerator gen(st, 100000, chain);
  CovarianceAccumulator acc(gen.dimension());
  Matrix block;
  while (gen.next_block(block) > 0) acc.add_block(block);
  const CovarianceMatrix noisy =
      correct_chain(estimate_covariance(acc, st.basis, chain.z_c), calibration_from_chain(chain, 25), st.basis);
  for (auto _ : state) benchmark::DoNotOptimize(project_physical(noisy));
}
BENCHMARK(BM_Project25)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
