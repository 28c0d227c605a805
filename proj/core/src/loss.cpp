#include "nnipls/loss.hpp"

#include <cmath>
#include <numeric>

#include "nnipls/errors.hpp"
#include "nnipls/parallel.hpp"

namespace nnipls {

SquaredErrors& SquaredErrors::operator+=(const SquaredErrors& o) {
  energy += o.energy;
  force += o.force;
  n_frames += o.n_frames;
  n_components += o.n_components;
  return *this;
}

LossValues SquaredErrors::to_loss(const LossWeights& w) const {
  LossValues v;
  v.n_frames = n_frames;
  v.n_components = n_components;
  v.mse_energy = n_frames ? energy / static_cast<double>(n_frames) : 0.0;
  v.mse_force = n_components ? force / static_cast<double>(n_components) : 0.0;
  v.loss_energy = std::sqrt(v.mse_energy) * units::kMilli;
  v.loss_force = std::sqrt(v.mse_force) * units::kMilli;
  v.combined = w.energy * v.mse_energy + w.force * v.mse_force;
  return v;
}

namespace {

void require_labels(const Configuration& c) {
  if (!c.energy || !c.forces) throw InvalidArgument("loss needs energy and force labels");
}

std::vector<std::size_t> resolve_subset(const Dataset& d, std::span<const std::size_t> subset) {
  if (!subset.empty()) return {subset.begin(), subset.end()};
  std::vector<std::size_t> all(d.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return all;
}

}  // namespace

SquaredErrors squared_errors(const ForceModel& model, const Configuration& c) {
  require_labels(c);
  const auto ev = model.evaluate(c);
  SquaredErrors s;
  const double de = (ev.energy - *c.energy) / static_cast<double>(c.size());
  s.energy = de * de;
  s.n_frames = 1;
  for (std::size_t a = 0; a < c.size(); ++a)
    for (int k = 0; k < 3; ++k) {
      const double df = ev.forces[a][k] - (*c.forces)[a][k];
      s.force += df * df;
    }
  s.n_components = 3 * c.size();
  return s;
}

LossValues loss_eval(const ForceModel& model, const Dataset& d, const LossWeights& w,
                     std::span<const std::size_t> subset, unsigned threads) {
  const auto idx = resolve_subset(d, subset);
  if (idx.empty()) throw InvalidArgument("loss on an empty set of configurations");
  std::vector<SquaredErrors> parts(idx.size());
  parallel_for(idx.size(), threads, [&](std::size_t k) { parts[k] = squared_errors(model, d[idx[k]]); });
  SquaredErrors total;
  for (const auto& p : parts) total += p;
  return total.to_loss(w);
}

LossAndGradient loss_and_gradient(const NeuralPotential& model, const Dataset& d, const LossWeights& w,
                                  std::span<const std::size_t> subset, unsigned threads) {
  const auto idx = resolve_subset(d, subset);
  if (idx.empty()) throw InvalidArgument("loss on an empty set of configurations");

  std::size_t n_components = 0;
  for (auto i : idx) {
    require_labels(d[i]);
    n_components += 3 * d[i].size();
  }
  const double inv_frames = 1.0 / static_cast<double>(idx.size());
  const double inv_comp = 1.0 / static_cast<double>(n_components);
  const std::size_t P = model.n_parameters();

  std::vector<SquaredErrors> parts(idx.size());
  std::vector<std::vector<double>> grads(idx.size());
  parallel_for(idx.size(), threads, [&](std::size_t k) {
    const auto& c = d[idx[k]];
    const auto ev = model.nn_eval(c);
    const double n_atoms = static_cast<double>(c.size());
    const double de = (ev.energy - *c.energy) / n_atoms;
    SquaredErrors s;
    s.energy = de * de;
    s.n_frames = 1;
    s.n_components = 3 * c.size();
    std::vector<Vec3> rho(c.size());
    for (std::size_t a = 0; a < c.size(); ++a)
      for (int j = 0; j < 3; ++j) {
        const double df = ev.forces[a][j] - (*c.forces)[a][j];
        s.force += df * df;
        rho[a][j] = 2.0 * w.force * inv_comp * df;
      }
    parts[k] = s;
    const double energy_adjoint = 2.0 * w.energy * inv_frames * de / n_atoms;
    grads[k].assign(P, 0.0);
    model.accumulate_gradient(c, energy_adjoint, rho, grads[k]);
  });

  LossAndGradient out;
  SquaredErrors total;
  for (const auto& p : parts) total += p;
  out.loss = total.to_loss(w);
  out.gradient.assign(P, 0.0);
  for (const auto& g : grads)
    for (std::size_t p = 0; p < P; ++p) out.gradient[p] += g[p];
  return out;
}

}  // namespace nnipls
