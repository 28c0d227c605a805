#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "nnipls/entropy.hpp"
#include "nnipls/landscape.hpp"
#include "nnipls/neural_potential.hpp"

namespace nnipls::bench {
namespace {

void BM_FilterNormalize(benchmark::State& state) {
  const auto m = NeuralPotential::default_model(3, 4.0);
  const auto d = sample_direction(m.parameters(), 7);
  for (auto _ : state) benchmark::DoNotOptimize(filter_normalize(d, m.parameters()));
}
BENCHMARK(BM_FilterNormalize);

void BM_Landscape1d(benchmark::State& state) {
  const auto d = jittered(16, 6);
  const auto m = fit_rescale(NeuralPotential::default_model(4, 4.0), d);
  const auto grid = uniform_grid(-1.0, 1.0, 21);
  LandscapeOptions opts;
  opts.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(landscape_1d(m, d, 4, grid, 9, opts));
}
BENCHMARK(BM_Landscape1d)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_LossEntropy(benchmark::State& state) {
  std::vector<double> curve(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < curve.size(); ++i) curve[i] = 0.1 * static_cast<double>(i % 37);
  for (auto _ : state) benchmark::DoNotOptimize(loss_entropy(curve, kDefaultTForce));
}
BENCHMARK(BM_LossEntropy)->Arg(21)->Arg(1001);

}  // namespace
}  // namespace nnipls::bench
