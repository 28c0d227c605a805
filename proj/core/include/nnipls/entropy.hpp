#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nnipls/landscape.hpp"

namespace nnipls {

inline constexpr double kDefaultTEnergy = 4.0;  // meV/atom
inline constexpr double kDefaultTForce = 40.0;  // meV/A
inline constexpr double kDefaultAlpha = 0.2;

/// log sum_t exp(-curve[t] / kT), evaluated with a max shift. +inf entries
/// contribute nothing; a curve made only of +inf yields -inf.
double loss_entropy(std::span<const double> curve, double kT);

/// alpha * S_E + (1 - alpha) * S_F; alpha must lie in [0, 1].
double weighted_entropy(double s_energy, double s_force, double alpha);

struct EntropyReport {
  double s_energy = 0.0;
  double s_force = 0.0;
  double s = 0.0;
  double t_energy = kDefaultTEnergy;
  double t_force = kDefaultTForce;
  double alpha = kDefaultAlpha;
  double k = 1.0;
  std::size_t grid_points = 0;
  std::string profile_ref;

  std::string to_json() const;
};

EntropyReport entropy_from_profile(const LandscapeProfile& p, double t_energy = kDefaultTEnergy,
                                   double t_force = kDefaultTForce, double alpha = kDefaultAlpha);

struct TemperatureSweep {
  std::vector<EntropyReport> rows;
  double flat_reference = 0.0;  // log of the grid size
  std::size_t grid_points = 0;

  std::string to_csv() const;  // T_E,T_F,S_E,S_F,S
  std::string metadata_json() const;
};

/// n paired temperatures, log-spaced from (t_energy_lo, t_force_lo) to
/// (t_energy_hi, t_force_hi).
TemperatureSweep temperature_sweep(const LandscapeProfile& p, double t_energy_lo, double t_energy_hi,
                                   double t_force_lo, double t_force_hi, std::size_t n,
                                   double alpha = kDefaultAlpha);

}  // namespace nnipls
