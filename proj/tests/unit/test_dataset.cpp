#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "nnipls/dataset.hpp"
#include "nnipls/errors.hpp"
#include "test_support.hpp"

namespace nnipls {
namespace {

/// Frames with Gaussian force labels of the given std and per-atom energies of std 0.01 eV.
Dataset gaussian_labels(std::size_t frames, std::size_t atoms, double force_std, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Configuration> out;
  for (std::size_t f = 0; f < frames; ++f) {
    Configuration c;
    std::vector<Vec3> forces;
    for (std::size_t a = 0; a < atoms; ++a) {
      c.positions.push_back({double(a), 0, 0});
      c.species.push_back("C");
      forces.push_back({force_std * g(rng), force_std * g(rng), force_std * g(rng)});
    }
    c.forces = forces;
    c.energy = atoms * (-3.0 + 0.01 * g(rng));
    c.temperature_tag = (f % 3 == 0) ? 300.0 : (f % 3 == 1 ? 600.0 : 1200.0);
    out.push_back(std::move(c));
  }
  return Dataset("gauss", std::move(out));
}

Configuration one_atom(double energy) {
  Configuration c;
  c.positions = {{0, 0, 0}};
  c.species = {"H"};
  c.energy = energy;
  return c;
}

TEST(Configuration, ValidateRejectsInconsistentCounts) {
  Configuration c;
  c.positions = {{0, 0, 0}, {1, 0, 0}};
  c.species = {"C"};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.species = {"C", "C"};
  c.forces = std::vector<Vec3>{{0, 0, 0}};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.forces = std::vector<Vec3>{{0, 0, 0}, {0, 0, NAN}};
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.forces.reset();
  c.energy = INFINITY;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.energy = 1.0;
  Cell cell;
  cell.periodic = {true, false, false};
  c.cell = cell;
  EXPECT_THROW(c.validate(), InvalidArgument);  // singular periodic cell
  cell.vectors = {Vec3{3, 0, 0}, Vec3{0, 3, 0}, Vec3{0, 0, 3}};
  c.cell = cell;
  EXPECT_NO_THROW(c.validate());
}

TEST(Dataset, RejectsEmpty) { EXPECT_THROW(Dataset("e", {}), InvalidArgument); }

TEST(Dataset, SigmaIsPopulationStd) {
  const Dataset d("two", {one_atom(0.0), one_atom(2.0)});
  ASSERT_TRUE(d.sigma_dft_energy());
  EXPECT_DOUBLE_EQ(*d.sigma_dft_energy(), 1000.0);
  EXPECT_FALSE(d.sigma_dft_force());
}

TEST(DatasetStats, TwoOneAtomFrames) {
  const auto s = dataset_stats(Dataset("two", {one_atom(0.0), one_atom(2.0)}));
  EXPECT_DOUBLE_EQ(s.energy_std_mev_per_atom, 1000.0);
  EXPECT_DOUBLE_EQ(s.energy_mean_mev_per_atom, 1000.0);
  EXPECT_EQ(s.untagged, 2u);
}

TEST(DatasetStats, EqualEnergiesGiveZeroStd) {
  const auto s = dataset_stats(Dataset("eq", {one_atom(-1.5), one_atom(-1.5), one_atom(-1.5)}));
  EXPECT_EQ(s.energy_std_mev_per_atom, 0.0);
}

TEST(DatasetStats, GaussianForcesMatchGenerator) {
  const auto d = gaussian_labels(600, 20, 0.7, 11);
  const auto s = dataset_stats(d);
  EXPECT_NEAR(s.force_std, 0.7, 0.02 * 0.7);
  EXPECT_NEAR(s.energy_std_mev_per_atom, 10.0, 0.2);
  EXPECT_EQ(s.n_force_components, 600u * 20 * 3);
  EXPECT_EQ(s.counts_per_temperature.at(300.0), 200u);
  EXPECT_EQ(s.counts_per_temperature.at(1200.0), 200u);
}

TEST(CorruptLabels, ZeroSigmaIsBitwiseIdentity) {
  const auto d = gaussian_labels(10, 4, 1.0, 1);
  const auto c = corrupt_labels(d, {0.0, NoiseTarget::kBoth, 9});
  for (std::size_t f = 0; f < d.size(); ++f) {
    EXPECT_EQ(*c[f].energy, *d[f].energy);
    EXPECT_EQ(*c[f].forces, *d[f].forces);
  }
}

TEST(CorruptLabels, ForceNoiseHasRequestedScale) {
  const auto d = gaussian_labels(2000, 20, 0.5, 2);
  const auto before = *d[0].forces;
  const auto c = corrupt_labels(d, {0.1, NoiseTarget::kForces, 17});
  EXPECT_EQ(*d[0].forces, before);  // input untouched
  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f < d.size(); ++f) {
    EXPECT_EQ(*c[f].energy, *d[f].energy);
    for (std::size_t a = 0; a < d[f].size(); ++a)
      for (int k = 0; k < 3; ++k) {
        const double e = (*c[f].forces)[a][k] - (*d[f].forces)[a][k];
        sum += e;
        sq += e * e;
        ++n;
      }
  }
  ASSERT_GE(n, 100000u);
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  const double target = 0.1 * *d.sigma_dft_force();
  EXPECT_NEAR(sd, target, 0.02 * target);
  EXPECT_LT(std::abs(mean), 3.0 * target / std::sqrt(double(n)));
}

TEST(CorruptLabels, EnergyNoiseScalesWithAtomCount) {
  const auto d = gaussian_labels(3000, 5, 0.5, 3);
  const auto c = corrupt_labels(d, {1.0, NoiseTarget::kEnergies, 5});
  double sq = 0.0;
  for (std::size_t f = 0; f < d.size(); ++f) {
    const double e = (*c[f].energy - *d[f].energy) / d[f].size();
    sq += e * e;
    EXPECT_EQ(*c[f].forces, *d[f].forces);
  }
  const double per_atom_std_mev = std::sqrt(sq / d.size()) * 1000.0;
  EXPECT_NEAR(per_atom_std_mev, *d.sigma_dft_energy(), 0.05 * *d.sigma_dft_energy());
}

TEST(CorruptLabels, SeededAndReproducible) {
  const auto d = gaussian_labels(5, 3, 1.0, 4);
  const auto a = corrupt_labels(d, {0.1, NoiseTarget::kBoth, 1});
  const auto b = corrupt_labels(d, {0.1, NoiseTarget::kBoth, 1});
  const auto c = corrupt_labels(d, {0.1, NoiseTarget::kBoth, 2});
  EXPECT_EQ(*a[3].forces, *b[3].forces);
  EXPECT_EQ(*a[3].energy, *b[3].energy);
  EXPECT_NE(*a[3].forces, *c[3].forces);
}

TEST(CorruptLabels, UnbiasedOverSeeds) {
  const auto d = gaussian_labels(1, 2, 1.0, 8);
  const double x0 = (*d[0].forces)[1][2];
  const double scale = 0.1 * *d.sigma_dft_force();
  double sum = 0.0;
  const int seeds = 4000;
  for (int s = 0; s < seeds; ++s) sum += (*corrupt_labels(d, {0.1, NoiseTarget::kForces, std::uint64_t(s)})[0].forces)[1][2];
  EXPECT_LT(std::abs(sum / seeds - x0), 3.0 * scale / std::sqrt(double(seeds)));
}

TEST(CorruptLabels, MissingTargetIsAnError) {
  const Dataset d("e", {one_atom(1.0), one_atom(2.0)});
  EXPECT_THROW(corrupt_labels(d, {0.1, NoiseTarget::kForces, 0}), InvalidArgument);
  EXPECT_THROW(corrupt_labels(d, {-0.1, NoiseTarget::kEnergies, 0}), InvalidArgument);
  EXPECT_EQ(parse_noise_target("both"), NoiseTarget::kBoth);
  EXPECT_THROW(parse_noise_target("stress"), ConfigError);
}

TEST(SplitByTemperature, KeysAndHoldout) {
  const auto d = gaussian_labels(30, 2, 1.0, 5);
  const auto s = split_by_temperature(d, 300.0, 0.1, 1);
  std::set<double> keys;
  for (const auto& [t, _] : s.tests) keys.insert(t);
  EXPECT_EQ(keys, (std::set<double>{300.0, 600.0, 1200.0}));
  EXPECT_EQ(s.tests.at(300.0).size(), 1u);
  EXPECT_EQ(s.train.size(), 9u);
  for (const auto& c : s.train) EXPECT_EQ(*c.temperature_tag, 300.0);
}

TEST(SplitByTemperature, PartitionIsExhaustiveAndDisjoint) {
  const auto d = gaussian_labels(40, 2, 1.0, 6);
  const auto s = split_by_temperature(d, 600.0, 0.25, 3);
  std::multiset<double> original, parts;
  for (const auto& c : d) original.insert(*c.energy);
  for (const auto& c : s.train) parts.insert(*c.energy);
  std::size_t total = s.train.size();
  for (const auto& [_, t] : s.tests) {
    total += t.size();
    for (const auto& c : t) parts.insert(*c.energy);
  }
  EXPECT_EQ(total, d.size());
  EXPECT_EQ(parts, original);
}

TEST(SplitByTemperature, SingleTemperatureHasNoHighTSplits) {
  auto frames = gaussian_labels(9, 2, 1.0, 7).configurations();
  for (auto& c : frames) c.temperature_tag = 300.0;
  const auto s = split_by_temperature(Dataset("one", frames), 300.0, 0.0);
  EXPECT_TRUE(s.tests.empty());
  EXPECT_EQ(s.train.size(), 9u);
}

TEST(SplitByTemperature, Errors) {
  const auto d = gaussian_labels(9, 2, 1.0, 7);
  EXPECT_THROW(split_by_temperature(d, 450.0), InvalidArgument);
  EXPECT_THROW(split_by_temperature(d, 300.0, 1.0), InvalidArgument);
  EXPECT_THROW(split_by_temperature(Dataset("u", {one_atom(1.0)}), 300.0), InvalidArgument);
}

TEST(AtomicMass, KnownAndUnknown) {
  EXPECT_NEAR(atomic_mass("C"), 12.011, 1e-3);
  EXPECT_NEAR(atomic_mass("H"), 1.008, 1e-3);
  EXPECT_THROW(atomic_mass("Xx"), InvalidArgument);
}

}  // namespace
}  // namespace nnipls
