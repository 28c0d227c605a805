#include "nnipls/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "nnipls/errors.hpp"
#include "nnipls/extxyz.hpp"
#include "nnipls/random.hpp"

namespace nnipls {

void TrainConfig::validate() const {
  if (!(lr0 >= 0.0)) throw ConfigError("lr0 must be >= 0");
  if (batch_size == 0) throw ConfigError("batch_size must be > 0");
  if (!(plateau.factor > 0.0 && plateau.factor < 1.0)) throw ConfigError("plateau.factor must lie in (0, 1)");
  if (plateau.patience == 0) throw ConfigError("plateau.patience must be > 0");
  if (ema_decay && !(*ema_decay > 0.0 && *ema_decay < 1.0)) throw ConfigError("ema_decay must lie in (0, 1)");
  if (weight_schedule.empty()) throw ConfigError("weight_schedule must not be empty");
  for (std::size_t k = 1; k < weight_schedule.size(); ++k)
    if (weight_schedule[k].epoch <= weight_schedule[k - 1].epoch)
      throw ConfigError("weight_schedule epochs must be strictly increasing");
  for (const auto& s : weight_schedule)
    if (!(s.w_energy >= 0.0 && s.w_force >= 0.0)) throw ConfigError("loss weights must be >= 0");
}

std::pair<double, double> apply_weight_schedule(const TrainConfig& cfg, long long epoch) {
  if (cfg.weight_schedule.empty()) throw InvalidArgument("empty weight schedule");
  if (epoch < 0 || static_cast<std::size_t>(epoch) < cfg.weight_schedule.front().epoch)
    throw InvalidArgument("epoch " + std::to_string(epoch) + " precedes the weight schedule");
  const WeightStep* current = &cfg.weight_schedule.front();
  for (const auto& s : cfg.weight_schedule)
    if (s.epoch <= static_cast<std::size_t>(epoch)) current = &s;
  return {current->w_energy, current->w_force};
}

AdamOptimizer::AdamOptimizer(std::size_t n, bool amsgrad, double beta1, double beta2, double eps)
    : amsgrad_(amsgrad), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {
  if (amsgrad_) v_max_.assign(n, 0.0);
}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw InvalidArgument("optimizer size mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < m_.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    double v = v_[i];
    if (amsgrad_) {
      v_max_[i] = std::max(v_max_[i], v_[i]);
      v = v_max_[i];
    }
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v / c2) + eps_);
  }
}

PlateauScheduler::PlateauScheduler(double lr0, PlateauConfig cfg)
    : lr_(lr0), cfg_(cfg), best_(std::numeric_limits<double>::infinity()) {}

double PlateauScheduler::step(double loss) {
  if (loss < best_) {
    best_ = loss;
    bad_epochs_ = 0;
  } else if (++bad_epochs_ >= cfg_.patience) {
    lr_ *= cfg_.factor;
    bad_epochs_ = 0;
  }
  return lr_;
}

ExponentialMovingAverage::ExponentialMovingAverage(std::span<const double> initial, double decay)
    : decay_(decay), values_(initial.begin(), initial.end()) {}

void ExponentialMovingAverage::update(std::span<const double> params) {
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = decay_ * values_[i] + (1.0 - decay_) * params[i];
}

const std::vector<double>& TrainReport::selected_params() const {
  if (swa_params) return *swa_params;
  if (ema_params) return *ema_params;
  return best_params;
}

namespace {

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

TrainReport train(const NeuralPotential& m, const Dataset& d_train, const TrainConfig& cfg, const Dataset* validation,
                  const TrainHooks& hooks) {
  cfg.validate();
  NeuralPotential model = m;
  std::vector<double> theta = model.parameters().values;
  const std::size_t P = theta.size();

  std::vector<char> trainable(P, 1);
  for (const auto& b : model.parameters().partition.blocks)
    if (b.frozen) std::fill_n(trainable.begin() + static_cast<std::ptrdiff_t>(b.offset), b.length, 0);

  AdamOptimizer adam(P, cfg.amsgrad);
  PlateauScheduler scheduler(cfg.lr0, cfg.plateau);
  std::optional<ExponentialMovingAverage> ema;
  if (cfg.ema_decay) ema.emplace(theta, *cfg.ema_decay);
  std::vector<double> swa_sum;
  std::size_t swa_count = 0;

  Rng rng = make_rng(cfg.seed, "train.shuffle");
  std::vector<std::size_t> order(d_train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainReport report;
  double best_score = std::numeric_limits<double>::infinity();
  report.best_params = theta;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    const auto [w_e, w_f] = apply_weight_schedule(cfg, static_cast<long long>(epoch));
    const LossWeights weights{w_e, w_f};
    const double lr = scheduler.lr();
    std::shuffle(order.begin(), order.end(), rng);

    SquaredErrors epoch_errors;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                     order.begin() + static_cast<std::ptrdiff_t>(stop));
      std::sort(batch.begin(), batch.end());
      model.set_parameter_values(theta);
      auto lg = loss_and_gradient(model, d_train, weights, batch, cfg.threads);
      if (!std::isfinite(lg.loss.combined) || !all_finite(lg.gradient))
        throw NumericError("training diverged at epoch " + std::to_string(epoch));
      epoch_errors.energy += lg.loss.mse_energy * static_cast<double>(lg.loss.n_frames);
      epoch_errors.force += lg.loss.mse_force * static_cast<double>(lg.loss.n_components);
      epoch_errors.n_frames += lg.loss.n_frames;
      epoch_errors.n_components += lg.loss.n_components;

      for (std::size_t i = 0; i < P; ++i)
        if (!trainable[i]) lg.gradient[i] = 0.0;
      adam.step(theta, lg.gradient, lr);
      model.project_constraints(theta);
      if (!all_finite(theta)) throw NumericError("training diverged at epoch " + std::to_string(epoch));
      if (ema) ema->update(theta);
      if (hooks.on_step) hooks.on_step(theta);
    }

    const auto loss = epoch_errors.to_loss(weights);
    EpochRecord rec{epoch, loss.loss_energy, loss.loss_force, loss.combined, lr, w_e, w_f, std::nullopt};
    double score = loss.combined;
    if (validation) {
      model.set_parameter_values(theta);
      rec.validation_combined = loss_eval(model, *validation, weights, {}, cfg.threads).combined;
      score = *rec.validation_combined;
    }
    if (!std::isfinite(score)) throw NumericError("training diverged at epoch " + std::to_string(epoch));
    if (score < best_score) {
      best_score = score;
      report.best_epoch = epoch;
      report.best_params = theta;
    }
    report.history.push_back(rec);

    if (cfg.swa_tail && epoch >= *cfg.swa_tail) {
      if (swa_sum.empty()) swa_sum.assign(P, 0.0);
      for (std::size_t i = 0; i < P; ++i) swa_sum[i] += theta[i];
      ++swa_count;
    }
    scheduler.step(loss.combined);
  }

  report.final_params = theta;
  if (ema) report.ema_params = ema->values();
  if (swa_count > 0) {
    for (double& x : swa_sum) x /= static_cast<double>(swa_count);
    report.swa_params = std::move(swa_sum);
  }
  return report;
}

std::string history_csv(const TrainReport& report) {
  std::ostringstream out;
  out << "epoch,loss_E,loss_F,combined,lr,w_E,w_F\n";
  for (const auto& r : report.history)
    out << r.epoch << ',' << format_double(r.loss_energy) << ',' << format_double(r.loss_force) << ','
        << format_double(r.combined) << ',' << format_double(r.lr) << ',' << format_double(r.w_energy) << ','
        << format_double(r.w_force) << '\n';
  return out.str();
}

}  // namespace nnipls
