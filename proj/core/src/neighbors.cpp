#include "nnipls/neighbors.hpp"

#include <cmath>

#include "nnipls/errors.hpp"

namespace nnipls {
namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

}  // namespace

std::vector<NeighborPair> full_neighbor_list(const Configuration& c, double cutoff) {
  std::array<int, 3> reps{0, 0, 0};
  if (c.cell && c.cell->any_periodic()) {
    const auto& v = c.cell->vectors;
    const double volume = std::abs(c.cell->determinant());
    for (int k = 0; k < 3; ++k) {
      if (!c.cell->periodic[k]) continue;
      const double height = volume / norm(cross(v[(k + 1) % 3], v[(k + 2) % 3]));
      reps[k] = static_cast<int>(std::ceil(cutoff / height));
    }
  }

  std::vector<NeighborPair> pairs;
  const std::size_t n = c.size();
  const double cut2 = cutoff * cutoff;
  for (int a = -reps[0]; a <= reps[0]; ++a)
    for (int b = -reps[1]; b <= reps[1]; ++b)
      for (int e = -reps[2]; e <= reps[2]; ++e) {
        Vec3 shift{0.0, 0.0, 0.0};
        const bool image = a != 0 || b != 0 || e != 0;
        if (image) {
          const auto& v = c.cell->vectors;
          shift = static_cast<double>(a) * v[0] + static_cast<double>(b) * v[1] + static_cast<double>(e) * v[2];
        }
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) {
            if (i == j && !image) continue;
            const Vec3 d = c.positions[j] + shift - c.positions[i];
            const double r2 = dot(d, d);
            if (r2 >= cut2) continue;
            if (r2 == 0.0) throw SingularGeometry(std::min(i, j), std::max(i, j));
            const double r = std::sqrt(r2);
            pairs.push_back({i, j, (1.0 / r) * d, r});
          }
      }
  return pairs;
}

}  // namespace nnipls
