#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nnipls/dataset.hpp"
#include "nnipls/neural_potential.hpp"

namespace nnipls {

/// A displacement in parameter space with the same layout as the weights.
struct Direction {
  std::vector<double> values;
  bool normalized = false;
};

/// i.i.d. standard normal entries, zero on frozen blocks. Not normalized.
Direction sample_direction(const ParameterVector& p, std::uint64_t seed);

/// Rescales each filter block of `d` to the Frobenius norm of the matching
/// block of `p`. Zero weight blocks and frozen blocks map to zero; a zero
/// direction block facing nonzero weights throws DegenerateDirection.
Direction filter_normalize(const Direction& d, const ParameterVector& p);

/// Gram-Schmidt on the raw vectors (global inner product), then filter
/// normalization of both. Throws DegenerateDirection for parallel inputs.
std::pair<Direction, Direction> orthogonalize_pair(const Direction& d1, const Direction& d2, const ParameterVector& p);

/// Energy and force RMSE at one parameter vector (meV/atom, meV/A).
struct LossPoint {
  double energy = 0.0;
  double force = 0.0;
};
using LossFunction = std::function<LossPoint(std::span<const double> params)>;

struct LandscapeOptions {
  unsigned threads = 1;
  bool cache_origin = true;                 // evaluate t = 0 once and share it
  std::vector<std::size_t> frozen_layers;   // partition layers held fixed
};

struct LandscapeMetadata {
  std::string kind = "random";  // random | interpolation
  std::string model_id;
  std::string dataset_id;
  std::uint64_t seed = 0;
  std::size_t n_directions = 0;
  std::vector<std::size_t> frozen_blocks;
  std::size_t evaluations = 0;
  std::size_t failed_points = 0;  // grid points stored as +inf
};

struct LandscapeProfile {
  std::vector<double> t_grid;
  std::vector<std::vector<double>> energy;  // [direction][t], meV/atom
  std::vector<std::vector<double>> force;   // [direction][t], meV/A
  std::vector<double> mean_energy;
  std::vector<double> mean_force;
  LandscapeMetadata meta;

  std::size_t n_directions() const { return energy.size(); }
  /// Arithmetic mean over directions at each t.
  void recompute_means();
};

struct Surface2D {
  std::vector<double> t1_grid;
  std::vector<double> t2_grid;
  std::vector<double> energy;  // row-major [i1 * |t2| + i2]
  std::vector<double> force;
  std::pair<std::size_t, std::size_t> direction_ids{0, 1};
  LandscapeMetadata meta;

  double energy_at(std::size_t i1, std::size_t i2) const { return energy[i1 * t2_grid.size() + i2]; }
  double force_at(std::size_t i1, std::size_t i2) const { return force[i1 * t2_grid.size() + i2]; }
};

/// n points evenly spaced on [lo, hi]; the midpoint of a symmetric odd grid is exactly 0.
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

/// Seed of the n-th random direction drawn from `seed`.
std::uint64_t direction_seed(std::uint64_t seed, std::size_t n);

/// Model-agnostic 1D scan: loss(theta + t * normalized direction_n) for every
/// direction and t. Grid points are independent and may run concurrently;
/// failures are stored as +inf and counted.
LandscapeProfile scan_1d(std::span<const double> theta, const FilterPartition& partition, const LossFunction& loss,
                         std::size_t n_directions, const std::vector<double>& t_grid, std::uint64_t seed,
                         const LandscapeOptions& options = {});

Surface2D scan_2d(std::span<const double> theta, const FilterPartition& partition, const LossFunction& loss,
                  const std::vector<double>& t1_grid, const std::vector<double>& t2_grid, std::uint64_t seed,
                  const LandscapeOptions& options = {});

/// Training-set loss as a function of the model's parameters.
LossFunction model_loss_function(const NeuralPotential& m, const Dataset& d);

LandscapeProfile landscape_1d(const NeuralPotential& m, const Dataset& d, std::size_t n_directions,
                              const std::vector<double>& t_grid, std::uint64_t seed,
                              const LandscapeOptions& options = {});

Surface2D landscape_2d(const NeuralPotential& m, const Dataset& d, const std::vector<double>& t1_grid,
                       const std::vector<double>& t2_grid, std::uint64_t seed, const LandscapeOptions& options = {});

/// Loss along theta(t) = (1 - t) theta_A + t theta_B (rescale constants are
/// interpolated the same way).
LandscapeProfile interpolate_models(const NeuralPotential& a, const NeuralPotential& b, const Dataset& d,
                                    const std::vector<double>& t_grid, unsigned threads = 1);

/// w_E * energy + w_F * force at every grid point, without re-evaluation.
std::vector<double> reweight_surface(const Surface2D& s, double w_energy, double w_force);

// Artifacts.
std::string profile_csv(const LandscapeProfile& p);  // direction,t,loss_energy_mev_per_atom,loss_force_mev_per_ang
LandscapeProfile profile_from_csv(const std::string& text);
std::string profile_metadata_json(const LandscapeProfile& p);
std::string surface_csv(const Surface2D& s);         // t1,t2,loss_energy,loss_force
std::string surface_metadata_json(const Surface2D& s);

}  // namespace nnipls
