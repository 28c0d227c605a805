#pragma once

#include <string>
#include <utility>
#include <variant>

#include "nnipls/force_model.hpp"

namespace nnipls {

struct LennardJones {
  double epsilon;  // eV
  double sigma;    // A
};

struct Morse {
  double depth;      // D, eV
  double stiffness;  // a, 1/A
  double r0;         // A
};

/// Analytic pair potential used as ground truth. Pair energies are multiplied
/// by a quintic switch that is exactly 1 below `switch_on` and brings energy,
/// first and second derivative to zero at `cutoff`.
class ReferencePotential : public ForceModel {
 public:
  using Kind = std::variant<LennardJones, Morse>;

  ReferencePotential(Kind kind, double cutoff, double switch_on);

  /// Cutoff defaults to 2.5 sigma, switching starts at 0.8 cutoff.
  static ReferencePotential lennard_jones(double epsilon, double sigma, double cutoff = 0.0, double switch_on = 0.0);
  static ReferencePotential morse(double depth, double stiffness, double r0, double cutoff, double switch_on = 0.0);

  const Kind& kind() const { return kind_; }
  double cutoff() const { return cutoff_; }
  double switch_on() const { return switch_on_; }
  std::string description() const;

  /// Switched pair energy and its r-derivative.
  std::pair<double, double> pair_energy(double r) const;

  Evaluation evaluate(const Configuration& c) const override;

 private:
  Kind kind_;
  double cutoff_;
  double switch_on_;
};

}  // namespace nnipls
