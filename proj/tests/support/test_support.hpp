#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "nnipls/dataset.hpp"
#include "nnipls/force_model.hpp"
#include "nnipls/reference_potential.hpp"

namespace nnipls::testing {

inline std::string data_path(const std::string& name) { return std::string(NNIPLS_TEST_DATA_DIR) + "/" + name; }

/// Default Morse reference used across the suite.
inline ReferencePotential morse_reference() { return ReferencePotential::morse(2.0, 2.0, 1.2, 4.0); }

/// n atoms uniformly in a cube of side `box`, rejecting pairs closer than `min_dist`.
inline Configuration random_cluster(std::size_t n, std::uint64_t seed, double box = 3.0, double min_dist = 0.9,
                                    const std::string& species = "C") {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, box);
  Configuration c;
  while (c.positions.size() < n) {
    const Vec3 p{u(rng), u(rng), u(rng)};
    bool ok = true;
    for (const auto& q : c.positions) ok = ok && norm(p - q) >= min_dist;
    if (ok) {
      c.positions.push_back(p);
      c.species.push_back(species);
    }
  }
  return c;
}

/// Attaches the model's energy and forces as labels.
inline Configuration labelled(const ForceModel& m, Configuration c) {
  const auto e = m.evaluate(c);
  c.energy = e.energy;
  c.forces = e.forces;
  return c;
}

inline Dataset labelled_clusters(const ForceModel& m, std::size_t n_frames, std::size_t n_atoms, std::uint64_t seed,
                                 const std::string& name = "clusters") {
  std::vector<Configuration> frames;
  for (std::size_t i = 0; i < n_frames; ++i) frames.push_back(labelled(m, random_cluster(n_atoms, seed * 1000 + i)));
  return Dataset(name, std::move(frames));
}

/// Central finite-difference force on atom a, axis k.
inline double fd_force(const ForceModel& m, Configuration c, std::size_t a, std::size_t k, double h = 1e-5) {
  c.positions[a][k] += h;
  const double ep = m.evaluate(c).energy;
  c.positions[a][k] -= 2 * h;
  const double em = m.evaluate(c).energy;
  return -(ep - em) / (2 * h);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("nnipls_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace nnipls::testing

namespace nnipls::testing {

/// max |F_analytic - F_fd| / max |F_analytic| over all components.
inline double force_fd_relative_error(const ForceModel& m, const Configuration& c, double h = 1e-5) {
  const auto ev = m.evaluate(c);
  double scale = 0.0, err = 0.0;
  for (std::size_t a = 0; a < c.size(); ++a)
    for (std::size_t k = 0; k < 3; ++k) {
      scale = std::max(scale, std::abs(ev.forces[a][k]));
      err = std::max(err, std::abs(ev.forces[a][k] - fd_force(m, c, a, k, h)));
    }
  return err / std::max(scale, 1e-12);
}

/// Rotation matrix from a unit quaternion drawn from `seed`.
inline std::array<Vec3, 3> random_rotation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  double q[4] = {g(rng), g(rng), g(rng), g(rng)};
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (double& x : q) x /= n;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  return {Vec3{1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)},
          Vec3{2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)},
          Vec3{2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)}};
}

inline Vec3 rotate(const std::array<Vec3, 3>& r, const Vec3& v) { return {dot(r[0], v), dot(r[1], v), dot(r[2], v)}; }

}  // namespace nnipls::testing
