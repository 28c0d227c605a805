#include "nnipls/descriptors.hpp"

#include <cmath>

#include "nnipls/errors.hpp"
#include "nnipls/neighbors.hpp"

namespace nnipls {

void DescriptorSpec::validate() const {
  if (centers.empty()) throw InvalidArgument("descriptor needs at least one radial function");
  if (centers.size() != widths.size()) throw InvalidArgument("descriptor centers/widths length mismatch");
  if (!(cutoff > 0.0)) throw InvalidArgument("descriptor cutoff must be > 0");
  for (double c : centers)
    if (!(c > 0.0 && c <= cutoff)) throw InvalidArgument("descriptor centers must lie in (0, cutoff]");
  for (double w : widths)
    if (!(w > 0.0)) throw InvalidArgument("descriptor widths must be > 0");
}

DescriptorSpec DescriptorSpec::uniform(std::size_t n_radial, double cutoff, bool trainable_basis) {
  if (n_radial == 0) throw InvalidArgument("n_radial must be > 0");
  DescriptorSpec s;
  s.cutoff = cutoff;
  s.trainable_basis = trainable_basis;
  const double lo = std::min(0.5, cutoff);
  const double step = n_radial > 1 ? (cutoff - lo) / static_cast<double>(n_radial - 1) : cutoff - lo;
  const double spacing = step > 0.0 ? step : cutoff;
  for (std::size_t k = 0; k < n_radial; ++k) {
    s.centers.push_back(lo + step * static_cast<double>(k));
    s.widths.push_back(0.5 / (spacing * spacing));
  }
  return s;
}

CutoffValue cutoff_function(double r, double cutoff) {
  if (r >= cutoff) return {0.0, 0.0};
  const double x = r / cutoff;
  const double f = 1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
  const double df = -30.0 * x * x * (1.0 - x) * (1.0 - x) / cutoff;
  return {f, df};
}

RadialTerm radial_term(double r, double center, double width, const CutoffValue& fc) {
  const double d = r - center;
  const double g = std::exp(-width * d * d);
  const double dg = -2.0 * width * d * g;
  return {g * fc.f, dg * fc.f + g * fc.df};
}

AtomDescriptors descriptors(const DescriptorSpec& spec, const Configuration& c, std::size_t atom_index) {
  spec.validate();
  if (atom_index >= c.size()) throw InvalidArgument("atom index out of range");
  const std::size_t n = c.size();
  const std::size_t k_count = spec.n_radial();
  AtomDescriptors out;
  out.values.assign(k_count, 0.0);
  out.jacobian.assign(k_count * n, Vec3{0.0, 0.0, 0.0});
  for (const auto& p : full_neighbor_list(c, spec.cutoff)) {
    if (p.i != atom_index) continue;
    const auto fc = cutoff_function(p.r, spec.cutoff);
    for (std::size_t k = 0; k < k_count; ++k) {
      const auto t = radial_term(p.r, spec.centers[k], spec.widths[k], fc);
      out.values[k] += t.phi;
      out.jacobian[k * n + p.j] += t.dphi * p.unit;
      out.jacobian[k * n + p.i] -= t.dphi * p.unit;
    }
  }
  return out;
}

}  // namespace nnipls
