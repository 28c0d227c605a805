#include "nnipls/experiments.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "nnipls/descriptors.hpp"
#include "nnipls/errors.hpp"
#include "nnipls/extxyz.hpp"
#include "nnipls/loss.hpp"
#include "nnipls/random.hpp"

namespace nnipls {

NeuralPotential build_model(const ModelSpec& spec, std::uint64_t seed, const Dataset& d) {
  NeuralPotential m(DescriptorSpec::uniform(spec.n_radial, spec.cutoff, spec.trainable_basis), spec.hidden, Rescale{},
                    substream_seed(seed, "model.init"));
  return spec.rescale ? fit_rescale(m, d) : m;
}

NeuralPotential train_model(const ModelSpec& spec, const Dataset& d, const TrainConfig& cfg, TrainReport* report) {
  auto m = build_model(spec, cfg.seed, d);
  auto r = train(m, d, cfg);
  m.set_parameter_values(r.selected_params());
  if (report) *report = std::move(r);
  return m;
}

std::vector<NoiseSweepRow> noise_sweep(const Dataset& base, const std::vector<double>& sigmas, const ModelSpec& spec,
                                       const TrainConfig& cfg, std::uint64_t seed) {
  if (sigmas.empty()) throw InvalidArgument("noise sweep needs at least one sigma");
  const auto sigma_force = base.sigma_dft_force();
  if (!sigma_force) throw InvalidArgument("noise sweep needs force labels");
  std::vector<NoiseSweepRow> rows;
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const auto noisy = corrupt_labels(base, {sigmas[k], NoiseTarget::kForces, substream_seed(seed, "noise", k)});
    const auto m = train_model(spec, noisy, cfg);
    const auto on_noisy = loss_eval(m, noisy, {}, {}, cfg.threads);
    const auto on_original = loss_eval(m, base, {}, {}, cfg.threads);
    rows.push_back({sigmas[k], sigmas[k] * *sigma_force * units::kMilli, on_noisy.loss_force,
                    on_original.loss_force, on_noisy.loss_energy, on_original.loss_energy});
  }
  return rows;
}

std::string noise_sweep_csv(const std::vector<NoiseSweepRow>& rows) {
  std::ostringstream out;
  out << "sigma,baseline_mev_per_ang,force_rmse_noisy,force_rmse_original,energy_rmse_noisy,energy_rmse_original\n";
  for (const auto& r : rows)
    out << format_double(r.sigma) << ',' << format_double(r.baseline) << ',' << format_double(r.force_rmse_noisy)
        << ',' << format_double(r.force_rmse_original) << ',' << format_double(r.energy_rmse_noisy) << ','
        << format_double(r.energy_rmse_original) << '\n';
  return out.str();
}

LearningCurve learning_curve(const Dataset& train, const std::map<double, Dataset>& tests,
                             const std::vector<std::size_t>& sizes, const ModelSpec& spec, const TrainConfig& cfg,
                             std::uint64_t seed) {
  if (sizes.size() < 2) throw InvalidArgument("learning curve needs at least two sizes");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_rng(seed, "learning_curve.subset");
  std::shuffle(order.begin(), order.end(), rng);

  LearningCurve lc;
  std::vector<std::pair<double, double>> pts;
  for (const auto n : sizes) {
    if (n == 0 || n > train.size())
      throw InvalidArgument("learning-curve size " + std::to_string(n) + " outside [1, " +
                            std::to_string(train.size()) + "]");
    std::vector<std::size_t> pick(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(pick.begin(), pick.end());
    std::vector<Configuration> frames;
    for (auto i : pick) frames.push_back(train[i]);
    const Dataset subset(train.name() + "_n" + std::to_string(n), std::move(frames));
    const auto m = train_model(spec, subset, cfg);
    auto table = rmse_by_split(m, tests, cfg.threads);
    pts.emplace_back(static_cast<double>(n), table.pooled.force_rmse);
    lc.points.push_back({n, std::move(table)});
  }
  lc.fit = learning_curve_slope(pts);
  return lc;
}

std::string LearningCurve::to_csv() const {
  std::ostringstream out;
  out << "n,energy_rmse_pooled,force_rmse_pooled\n";
  for (const auto& p : points)
    out << p.n << ',' << format_double(p.errors.pooled.energy_rmse) << ',' << format_double(p.errors.pooled.force_rmse)
        << '\n';
  return out.str();
}

}  // namespace nnipls
