#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nnipls/vec3.hpp"

namespace nnipls {

/// Periodic cell: three lattice vectors (rows, Angstrom) and per-axis flags.
struct Cell {
  std::array<Vec3, 3> vectors{};
  std::array<bool, 3> periodic{false, false, false};

  bool any_periodic() const { return periodic[0] || periodic[1] || periodic[2]; }
  double determinant() const;
};

/// One labelled atomic configuration. Energies in eV, forces in eV/A,
/// positions in A. Energy and forces are absent for unlabelled frames.
struct Configuration {
  std::vector<Vec3> positions;
  std::vector<std::string> species;
  std::optional<Cell> cell;
  std::optional<double> energy;
  std::optional<std::vector<Vec3>> forces;
  std::optional<double> temperature_tag;  // K

  std::size_t size() const { return positions.size(); }

  /// Throws InvalidArgument when counts disagree, a periodic cell is
  /// singular, or a label is non-finite.
  void validate() const;
};

/// Immutable, nonempty collection of configurations. The label spreads
/// (population standard deviations) are recomputed on construction.
class Dataset {
 public:
  Dataset(std::string name, std::vector<Configuration> configurations);

  const std::string& name() const { return name_; }
  const std::vector<Configuration>& configurations() const { return configurations_; }
  std::size_t size() const { return configurations_.size(); }
  const Configuration& operator[](std::size_t i) const { return configurations_[i]; }
  auto begin() const { return configurations_.begin(); }
  auto end() const { return configurations_.end(); }

  /// Std of per-atom energies, meV/atom. Absent when no frame has an energy.
  std::optional<double> sigma_dft_energy() const { return sigma_energy_; }
  /// Pooled std of force components, eV/A. Absent when no frame has forces.
  std::optional<double> sigma_dft_force() const { return sigma_force_; }

  std::size_t total_atoms() const;

 private:
  std::string name_;
  std::vector<Configuration> configurations_;
  std::optional<double> sigma_energy_;
  std::optional<double> sigma_force_;
};

enum class NoiseTarget { kEnergies, kForces, kBoth };

struct NoiseSpec {
  double sigma = 0.0;  // dimensionless multiple of sigma_DFT
  NoiseTarget target = NoiseTarget::kForces;
  std::uint64_t seed = 0;
};

NoiseTarget parse_noise_target(const std::string& text);

/// Adds g * sigma * sigma_DFT (g ~ N(0,1)) independently to every targeted
/// scalar label. Total energies are perturbed with the per-atom scale times
/// the atom count. The input is never modified.
Dataset corrupt_labels(const Dataset& d, const NoiseSpec& spec);

struct DatasetStats {
  std::size_t n_configurations = 0;
  std::size_t n_atoms = 0;
  std::size_t n_force_components = 0;
  double energy_mean_mev_per_atom = 0.0;
  double energy_std_mev_per_atom = 0.0;
  double force_mean = 0.0;  // eV/A
  double force_std = 0.0;   // eV/A
  std::map<double, std::size_t> counts_per_temperature;
  std::size_t untagged = 0;
};

DatasetStats dataset_stats(const Dataset& d);

struct TemperatureSplit {
  Dataset train;
  std::map<double, Dataset> tests;  // includes the held-out part of train_T when nonempty
};

/// Partitions by temperature tag. Frames at `train_temperature` are shuffled
/// (seeded) and `holdout_fraction` of them go to tests[train_temperature].
TemperatureSplit split_by_temperature(const Dataset& d, double train_temperature,
                                      double holdout_fraction = 0.1, std::uint64_t seed = 0);

/// Atomic mass in amu for an element symbol; throws InvalidArgument for unknown symbols.
double atomic_mass(const std::string& symbol);

}  // namespace nnipls
