#pragma once

#include <cstddef>
#include <vector>

#include "nnipls/dataset.hpp"
#include "nnipls/vec3.hpp"

namespace nnipls {

/// Directed neighbor pair i -> j (possibly a periodic image of j).
struct NeighborPair {
  std::size_t i;
  std::size_t j;
  Vec3 unit;    // (x_j + shift - x_i) / r
  double r;
};

/// Full (both directions) neighbor list within `cutoff`. Periodic images are
/// enumerated along periodic axes. Throws SingularGeometry for r == 0.
std::vector<NeighborPair> full_neighbor_list(const Configuration& c, double cutoff);

}  // namespace nnipls
