#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nnipls/dataset.hpp"
#include "nnipls/loss.hpp"
#include "nnipls/neural_potential.hpp"

namespace nnipls {

struct WeightStep {
  std::size_t epoch = 0;
  double w_energy = 1.0;
  double w_force = 1000.0;
};

struct PlateauConfig {
  std::size_t patience = 50;
  double factor = 0.5;
};

struct TrainConfig {
  std::size_t max_epochs = 200;
  std::size_t batch_size = 5;
  double lr0 = 0.01;
  bool amsgrad = false;
  std::optional<double> ema_decay;
  PlateauConfig plateau;
  std::vector<WeightStep> weight_schedule{WeightStep{0, 1.0, 1000.0}};
  std::optional<std::size_t> swa_tail;  // epoch from which weights are tail-averaged
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void validate() const;
};

/// Piecewise-constant energy/force weights: the last schedule entry whose
/// epoch is <= `epoch`. Epochs before the first entry are rejected.
std::pair<double, double> apply_weight_schedule(const TrainConfig& cfg, long long epoch);

/// Adam with bias correction; the AMSGrad variant keeps the running maximum
/// of the second moment. beta1 = 0.9, beta2 = 0.999, eps = 1e-8.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::size_t n, bool amsgrad = false, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> grad, double lr);
  std::size_t steps() const { return t_; }

 private:
  bool amsgrad_;
  double beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::vector<double> m_, v_, v_max_;
};

/// Multiplies the learning rate by `factor` once `patience` consecutive
/// epochs pass without a strict improvement of the monitored loss.
class PlateauScheduler {
 public:
  PlateauScheduler(double lr0, PlateauConfig cfg);
  double step(double loss);
  double lr() const { return lr_; }

 private:
  double lr_;
  PlateauConfig cfg_;
  double best_;
  std::size_t bad_epochs_ = 0;
};

class ExponentialMovingAverage {
 public:
  ExponentialMovingAverage(std::span<const double> initial, double decay);
  void update(std::span<const double> params);
  const std::vector<double>& values() const { return values_; }

 private:
  double decay_;
  std::vector<double> values_;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double loss_energy = 0.0;  // meV/atom
  double loss_force = 0.0;   // meV/A
  double combined = 0.0;
  double lr = 0.0;
  double w_energy = 0.0;
  double w_force = 0.0;
  std::optional<double> validation_combined;
};

struct TrainReport {
  std::vector<EpochRecord> history;
  std::vector<double> final_params;
  std::optional<std::vector<double>> ema_params;
  std::optional<std::vector<double>> swa_params;
  std::size_t best_epoch = 0;
  std::vector<double> best_params;

  /// Tail average when enabled, else EMA when enabled, else best-epoch weights.
  const std::vector<double>& selected_params() const;
};

struct TrainHooks {
  std::function<void(std::span<const double>)> on_step;  // iterate after every optimizer step
};

/// Mini-batch training of `m` on `d_train`. Batches follow a seeded shuffle
/// and gradients are reduced in configuration order, so results are
/// reproducible for a given seed. Throws NumericError on divergence.
TrainReport train(const NeuralPotential& m, const Dataset& d_train, const TrainConfig& cfg,
                  const Dataset* validation = nullptr, const TrainHooks& hooks = {});

/// `epoch,loss_E,loss_F,combined,lr,w_E,w_F`
std::string history_csv(const TrainReport& report);

}  // namespace nnipls
