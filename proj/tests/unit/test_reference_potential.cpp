#include <gtest/gtest.h>

#include <cmath>

#include "nnipls/errors.hpp"
#include "nnipls/reference_potential.hpp"
#include "test_support.hpp"

namespace nnipls {
namespace {

Configuration dimer(double r, const std::string& species = "Ar") {
  Configuration c;
  c.positions = {{0, 0, 0}, {r, 0, 0}};
  c.species = {species, species};
  return c;
}

TEST(LennardJones, ZeroCrossingAndMinimum) {
  const auto lj = ReferencePotential::lennard_jones(0.0104, 3.4);
  EXPECT_NEAR(lj.evaluate(dimer(3.4)).energy, 0.0, 1e-15);
  const auto at_min = lj.evaluate(dimer(std::pow(2.0, 1.0 / 6.0) * 3.4));
  EXPECT_NEAR(at_min.energy, -0.0104, 1e-15);
  EXPECT_NEAR(norm(at_min.forces[0]), 0.0, 1e-14);
}

TEST(Morse, ForceVanishesAtMinimum) {
  const auto m = testing::morse_reference();
  const auto e = m.evaluate(dimer(1.2, "C"));
  EXPECT_NEAR(e.energy, -2.0, 1e-15);
  EXPECT_NEAR(norm(e.forces[1]), 0.0, 1e-14);
}

TEST(Morse, AnalyticPairEnergyBelowSwitch) {
  const auto m = testing::morse_reference();
  const double r = 2.1;
  const double x = std::exp(-2.0 * (r - 1.2));
  EXPECT_NEAR(m.pair_energy(r).first, 2.0 * (x * x - 2 * x), 1e-15);
}

TEST(ReferencePotential, SmoothAtCutoff) {
  const auto m = testing::morse_reference();
  const double rc = m.cutoff();
  EXPECT_EQ(m.pair_energy(rc).first, 0.0);
  EXPECT_EQ(m.pair_energy(rc + 0.1).first, 0.0);
  EXPECT_NEAR(m.pair_energy(rc - 1e-6).first, 0.0, 1e-12);
  EXPECT_NEAR(m.pair_energy(rc - 1e-6).second, 0.0, 1e-8);
  // Continuity at the switch onset.
  const double s = m.switch_on();
  EXPECT_NEAR(m.pair_energy(s - 1e-9).first, m.pair_energy(s + 1e-9).first, 1e-9);
  EXPECT_NEAR(m.pair_energy(s - 1e-9).second, m.pair_energy(s + 1e-9).second, 1e-8);
}

TEST(ReferencePotential, DerivativeMatchesFiniteDifference) {
  const auto m = testing::morse_reference();
  for (double r = 0.8; r < 4.0; r += 0.137) {
    const double h = 1e-6;
    const double fd = (m.pair_energy(r + h).first - m.pair_energy(r - h).first) / (2 * h);
    EXPECT_NEAR(m.pair_energy(r).second, fd, 1e-7 * (1 + std::abs(fd))) << "r=" << r;
  }
}

TEST(ReferencePotential, ForcesMatchFiniteDifferences) {
  const auto morse = testing::morse_reference();
  const auto lj = ReferencePotential::lennard_jones(0.5, 1.0);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto c = testing::random_cluster(5, s);
    EXPECT_LT(testing::force_fd_relative_error(morse, c), 1e-5);
    EXPECT_LT(testing::force_fd_relative_error(lj, c), 1e-5);
  }
}

TEST(ReferencePotential, NetForceVanishesAndRotationCovariant) {
  const auto m = testing::morse_reference();
  const auto c = testing::random_cluster(7, 3);
  const auto e = m.evaluate(c);
  Vec3 total{};
  for (const auto& f : e.forces) total += f;
  EXPECT_LT(norm(total), 1e-8);
  const auto rot = testing::random_rotation(5);
  Configuration r = c;
  for (auto& p : r.positions) p = testing::rotate(rot, p);
  const auto er = m.evaluate(r);
  EXPECT_NEAR(er.energy, e.energy, 1e-8);
  for (std::size_t a = 0; a < c.size(); ++a)
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(er.forces[a][k], testing::rotate(rot, e.forces[a])[k], 1e-8);
}

TEST(ReferencePotential, PeriodicImagesContribute) {
  const auto m = testing::morse_reference();
  Configuration c = dimer(1.2, "C");
  c.positions = {{0, 0, 0}};
  c.species = {"C"};
  Cell cell;
  cell.vectors = {Vec3{1.5, 0, 0}, Vec3{0, 20, 0}, Vec3{0, 0, 20}};
  cell.periodic = {true, false, false};
  c.cell = cell;
  // One atom in a 1D chain of spacing 1.5: half the sum over images on both sides.
  double expected = 0.0;
  for (int n = 1; n * 1.5 < m.cutoff(); ++n) expected += m.pair_energy(n * 1.5).first;
  EXPECT_NEAR(m.evaluate(c).energy, expected, 1e-12);
}

TEST(ReferencePotential, CoincidentAtomsAreSingular) {
  const auto m = testing::morse_reference();
  EXPECT_THROW(m.evaluate(dimer(0.0, "C")), SingularGeometry);
}

TEST(ReferencePotential, RejectsInvalidParameters) {
  EXPECT_THROW(ReferencePotential::morse(-1.0, 2.0, 1.2, 4.0), InvalidArgument);
  EXPECT_THROW(ReferencePotential::lennard_jones(0.0, 1.0), InvalidArgument);
  EXPECT_THROW(ReferencePotential::morse(1.0, 2.0, 1.2, 4.0, 5.0), InvalidArgument);
}

TEST(ReferencePotential, SingleAtomHasZeroInteraction) {
  Configuration c;
  c.positions = {{0, 0, 0}};
  c.species = {"C"};
  const auto e = testing::morse_reference().evaluate(c);
  EXPECT_EQ(e.energy, 0.0);
  EXPECT_EQ(norm(e.forces[0]), 0.0);
}

}  // namespace
}  // namespace nnipls
