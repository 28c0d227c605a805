#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nnipls/dataset.hpp"
#include "nnipls/force_model.hpp"
#include "nnipls/neural_potential.hpp"

namespace nnipls {

/// Energy:force weighting of the training objective (default 1:1000).
struct LossWeights {
  double energy = 1.0;
  double force = 1000.0;
};

struct LossValues {
  double loss_energy = 0.0;  // RMSE of per-atom energy, meV/atom
  double loss_force = 0.0;   // RMSE over force components, meV/A
  double mse_energy = 0.0;   // (eV/atom)^2
  double mse_force = 0.0;    // (eV/A)^2
  double combined = 0.0;     // w_E * mse_energy + w_F * mse_force
  std::size_t n_frames = 0;
  std::size_t n_components = 0;
};

/// Sums of squared errors; the building block for pooling across splits.
struct SquaredErrors {
  double energy = 0.0;  // sum over frames of (dE/N)^2, (eV/atom)^2
  double force = 0.0;   // sum over components, (eV/A)^2
  std::size_t n_frames = 0;
  std::size_t n_components = 0;

  SquaredErrors& operator+=(const SquaredErrors& o);
  LossValues to_loss(const LossWeights& w) const;
};

SquaredErrors squared_errors(const ForceModel& model, const Configuration& c);

/// Loss of `model` on the whole dataset (or on `subset` indices when given).
LossValues loss_eval(const ForceModel& model, const Dataset& d, const LossWeights& w = {},
                     std::span<const std::size_t> subset = {}, unsigned threads = 1);

struct LossAndGradient {
  LossValues loss;
  std::vector<double> gradient;  // d combined / d theta
};

/// Combined loss and its exact parameter gradient. Per-configuration
/// contributions are reduced in configuration order, so the result does not
/// depend on `threads`.
LossAndGradient loss_and_gradient(const NeuralPotential& model, const Dataset& d, const LossWeights& w,
                                  std::span<const std::size_t> subset = {}, unsigned threads = 1);

}  // namespace nnipls
