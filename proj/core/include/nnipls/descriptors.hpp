#pragma once

#include <cstddef>
#include <vector>

#include "nnipls/dataset.hpp"
#include "nnipls/vec3.hpp"

namespace nnipls {

/// Gaussian radial symmetry functions
///   G_k(i) = sum_j exp(-width_k (r_ij - center_k)^2) * f_cut(r_ij)
/// with the C2 polynomial cutoff f_cut(r) = 1 - 10x^3 + 15x^4 - 6x^5, x = r/cutoff.
struct DescriptorSpec {
  std::vector<double> centers;  // A
  std::vector<double> widths;   // 1/A^2
  double cutoff = 5.0;          // A
  bool trainable_basis = false;

  std::size_t n_radial() const { return centers.size(); }
  void validate() const;

  /// n centers evenly spaced on [0.5, cutoff], widths matched to the spacing.
  static DescriptorSpec uniform(std::size_t n_radial = 8, double cutoff = 5.0, bool trainable_basis = false);
};

struct CutoffValue {
  double f;
  double df;
};
CutoffValue cutoff_function(double r, double cutoff);

/// Radial basis value phi(r) and derivative for one (center, width).
struct RadialTerm {
  double phi;
  double dphi;
};
RadialTerm radial_term(double r, double center, double width, const CutoffValue& fc);

struct AtomDescriptors {
  std::vector<double> values;    // n_radial
  std::vector<Vec3> jacobian;    // n_radial x n_atoms, dG_k/dx_a at [k * n_atoms + a]
};

/// Descriptor vector of one atom plus its analytic spatial Jacobian.
AtomDescriptors descriptors(const DescriptorSpec& spec, const Configuration& c, std::size_t atom_index);

}  // namespace nnipls
