#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nnipls/analysis.hpp"
#include "nnipls/dataset.hpp"
#include "nnipls/neural_potential.hpp"
#include "nnipls/training.hpp"

namespace nnipls {

struct ModelSpec {
  std::size_t n_radial = 12;
  double cutoff = 4.0;  // matches the default Morse reference cutoff
  std::vector<std::size_t> hidden{16, 16};
  bool trainable_basis = false;
  bool rescale = true;
};

/// Fresh model with seeded weights; rescale constants fitted to `d` when enabled.
NeuralPotential build_model(const ModelSpec& spec, std::uint64_t seed, const Dataset& d);

/// Trains a fresh model and returns it with the selected weights installed.
NeuralPotential train_model(const ModelSpec& spec, const Dataset& d, const TrainConfig& cfg,
                            TrainReport* report = nullptr);

struct NoiseSweepRow {
  double sigma = 0.0;
  double baseline = 0.0;  // sigma * sigma_DFT, meV/A
  double force_rmse_noisy = 0.0;
  double force_rmse_original = 0.0;
  double energy_rmse_noisy = 0.0;
  double energy_rmse_original = 0.0;
};

/// Corrupt forces at each sigma, train, and evaluate against both the noisy
/// and the original labels.
std::vector<NoiseSweepRow> noise_sweep(const Dataset& base, const std::vector<double>& sigmas, const ModelSpec& spec,
                                       const TrainConfig& cfg, std::uint64_t seed);

/// sigma,baseline_mev_per_ang,force_rmse_noisy,force_rmse_original,energy_rmse_noisy,energy_rmse_original
std::string noise_sweep_csv(const std::vector<NoiseSweepRow>& rows);

struct LearningCurvePoint {
  std::size_t n = 0;
  RmseTable errors;
};

struct LearningCurve {
  std::vector<LearningCurvePoint> points;
  SlopeFit fit;  // on the pooled force RMSE

  std::string to_csv() const;  // n,energy_rmse_pooled,force_rmse_pooled
};

/// Trains on nested subsets (first n of one seeded shuffle) of `train` and
/// evaluates each model on every test split.
LearningCurve learning_curve(const Dataset& train, const std::map<double, Dataset>& tests,
                             const std::vector<std::size_t>& sizes, const ModelSpec& spec, const TrainConfig& cfg,
                             std::uint64_t seed);

}  // namespace nnipls
