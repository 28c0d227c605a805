#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "nnipls/md.hpp"
#include "nnipls/neural_potential.hpp"

namespace nnipls::bench {
namespace {

template <class Model>
void run_steps(benchmark::State& state, const Model& model) {
  const auto c = ground_state(6);
  MDConfig cfg;
  auto s = make_state(model, c, init_velocities(c, 300.0, 1));
  for (auto _ : state) md_step(s, model, cfg);
  state.SetItemsProcessed(state.iterations());
}

void BM_MdStepReference(benchmark::State& state) { run_steps(state, morse()); }
BENCHMARK(BM_MdStepReference);

void BM_MdStepNeural(benchmark::State& state) { run_steps(state, NeuralPotential::default_model(5, 4.0)); }
BENCHMARK(BM_MdStepNeural);

}  // namespace
}  // namespace nnipls::bench
