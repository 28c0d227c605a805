#include "nnipls/reference_potential.hpp"

#include <cmath>
#include <sstream>

#include "nnipls/errors.hpp"
#include "nnipls/neighbors.hpp"

namespace nnipls {

ReferencePotential::ReferencePotential(Kind kind, double cutoff, double switch_on)
    : kind_(kind), cutoff_(cutoff), switch_on_(switch_on) {
  if (const auto* lj = std::get_if<LennardJones>(&kind_)) {
    if (!(lj->epsilon > 0.0 && lj->sigma > 0.0)) throw InvalidArgument("Lennard-Jones epsilon and sigma must be > 0");
  } else {
    const auto& m = std::get<Morse>(kind_);
    if (!(m.depth > 0.0 && m.stiffness > 0.0 && m.r0 > 0.0)) throw InvalidArgument("Morse D, a and r0 must be > 0");
  }
  if (!(cutoff_ > 0.0)) throw InvalidArgument("cutoff must be > 0");
  if (!(switch_on_ >= 0.0 && switch_on_ < cutoff_)) throw InvalidArgument("switch_on must lie in [0, cutoff)");
}

ReferencePotential ReferencePotential::lennard_jones(double epsilon, double sigma, double cutoff, double switch_on) {
  if (cutoff <= 0.0) cutoff = 2.5 * sigma;
  if (switch_on <= 0.0) switch_on = 0.8 * cutoff;
  return ReferencePotential(LennardJones{epsilon, sigma}, cutoff, switch_on);
}

ReferencePotential ReferencePotential::morse(double depth, double stiffness, double r0, double cutoff, double switch_on) {
  if (switch_on <= 0.0) switch_on = 0.8 * cutoff;
  return ReferencePotential(Morse{depth, stiffness, r0}, cutoff, switch_on);
}

std::string ReferencePotential::description() const {
  std::ostringstream s;
  if (const auto* lj = std::get_if<LennardJones>(&kind_))
    s << "lj(epsilon=" << lj->epsilon << ",sigma=" << lj->sigma;
  else {
    const auto& m = std::get<Morse>(kind_);
    s << "morse(D=" << m.depth << ",a=" << m.stiffness << ",r0=" << m.r0;
  }
  s << ",cutoff=" << cutoff_ << ",switch_on=" << switch_on_ << ")";
  return s.str();
}

std::pair<double, double> ReferencePotential::pair_energy(double r) const {
  if (r >= cutoff_) return {0.0, 0.0};
  double e = 0.0;
  double de = 0.0;
  if (const auto* lj = std::get_if<LennardJones>(&kind_)) {
    const double sr6 = std::pow(lj->sigma / r, 6);
    e = 4.0 * lj->epsilon * (sr6 * sr6 - sr6);
    de = 4.0 * lj->epsilon * (-12.0 * sr6 * sr6 + 6.0 * sr6) / r;
  } else {
    const auto& m = std::get<Morse>(kind_);
    const double x = std::exp(-m.stiffness * (r - m.r0));
    e = m.depth * (1.0 - x) * (1.0 - x) - m.depth;
    de = 2.0 * m.depth * m.stiffness * (1.0 - x) * x;
  }
  if (r <= switch_on_) return {e, de};
  const double w = cutoff_ - switch_on_;
  const double t = (r - switch_on_) / w;
  const double s = 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
  const double ds = -30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
  return {e * s, de * s + e * ds};
}

Evaluation ReferencePotential::evaluate(const Configuration& c) const {
  Evaluation out;
  out.forces.assign(c.size(), Vec3{0.0, 0.0, 0.0});
  for (const auto& p : full_neighbor_list(c, cutoff_)) {
    const auto [e, de] = pair_energy(p.r);
    out.energy += 0.5 * e;
    const Vec3 f = (0.5 * de) * p.unit;
    out.forces[p.i] += f;
    out.forces[p.j] -= f;
  }
  return out;
}

}  // namespace nnipls
