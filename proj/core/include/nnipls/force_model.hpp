#pragma once

#include <vector>

#include "nnipls/dataset.hpp"
#include "nnipls/vec3.hpp"

namespace nnipls {

struct Evaluation {
  double energy = 0.0;        // eV
  std::vector<Vec3> forces;   // eV/A, one per atom
};

/// Anything that maps a configuration to an energy and its negative gradient.
/// Implementations are pure and safe to call concurrently.
class ForceModel {
 public:
  virtual ~ForceModel() = default;
  virtual Evaluation evaluate(const Configuration& c) const = 0;
};

}  // namespace nnipls
