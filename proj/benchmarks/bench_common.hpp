#pragma once

#include <random>

#include "nnipls/dataset.hpp"
#include "nnipls/force_model.hpp"
#include "nnipls/generate.hpp"
#include "nnipls/reference_potential.hpp"

namespace nnipls::bench {

inline ReferencePotential morse() { return ReferencePotential::morse(2.0, 2.0, 1.2, 4.0); }

inline Configuration ground_state(std::size_t n_atoms) {
  return relax(morse(), compact_cluster(n_atoms, 1.2, "C"));
}

/// `n_frames` jittered copies of the ground state, labelled by the Morse reference.
inline Dataset jittered(std::size_t n_frames, std::size_t n_atoms, std::uint64_t seed = 1) {
  const auto ref = morse();
  const auto base = ground_state(n_atoms);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 0.05);
  std::vector<Configuration> frames;
  for (std::size_t f = 0; f < n_frames; ++f) {
    auto c = base;
    for (auto& p : c.positions)
      for (auto& x : p) x += g(rng);
    const auto e = ref.evaluate(c);
    c.energy = e.energy;
    c.forces = e.forces;
    frames.push_back(std::move(c));
  }
  return Dataset("bench", std::move(frames));
}

}  // namespace nnipls::bench
