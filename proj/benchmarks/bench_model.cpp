#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "nnipls/loss.hpp"
#include "nnipls/neural_potential.hpp"

namespace nnipls::bench {
namespace {

void BM_NeuralEval(benchmark::State& state) {
  const auto c = ground_state(static_cast<std::size_t>(state.range(0)));
  const auto m = NeuralPotential::default_model(1, 4.0);
  for (auto _ : state) benchmark::DoNotOptimize(m.nn_eval(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NeuralEval)->Arg(6)->Arg(13)->Arg(27);

void BM_ReferenceEval(benchmark::State& state) {
  const auto c = ground_state(static_cast<std::size_t>(state.range(0)));
  const auto ref = morse();
  for (auto _ : state) benchmark::DoNotOptimize(ref.evaluate(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ReferenceEval)->Arg(6)->Arg(27);

void BM_LossGradient(benchmark::State& state) {
  const auto d = jittered(32, 6);
  const auto m = fit_rescale(NeuralPotential::default_model(2, 4.0), d);
  const auto threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_gradient(m, d, {}, {}, threads));
}
BENCHMARK(BM_LossGradient)->Arg(1)->Arg(4)->UseRealTime();

}  // namespace
}  // namespace nnipls::bench
