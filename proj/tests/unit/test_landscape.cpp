#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <nlohmann/json.hpp>
#include <random>

#include "nnipls/errors.hpp"
#include "nnipls/landscape.hpp"
#include "nnipls/loss.hpp"
#include "test_support.hpp"

namespace nnipls {
namespace {

NeuralPotential model(std::uint64_t seed, bool trainable = false) {
  return NeuralPotential(DescriptorSpec::uniform(5, 4.0, trainable), {6, 4}, Rescale{0.5, -1.0, true}, seed);
}

/// Two-block parameter vector used by the hand-worked normalization examples.
ParameterVector two_blocks(std::vector<double> values) {
  ParameterVector p;
  p.values = std::move(values);
  p.partition.blocks = {{0, 0, 0, 2, false}, {0, 1, 2, 2, false}};
  return p;
}

/// Quadratic bowl around theta, in the same units for energy and force.
LossFunction quadratic_bowl(std::vector<double> theta, std::atomic<std::size_t>* calls = nullptr) {
  return [theta = std::move(theta), calls](std::span<const double> q) {
    if (calls) ++*calls;
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += (q[i] - theta[i]) * (q[i] - theta[i]) * (1.0 + 0.1 * i);
    return LossPoint{s, 2.0 * s};
  };
}

TEST(FilterNormalize, HandWorkedBlock) {
  // theta block (0, 2) has norm 2; delta block (3, 4) has norm 5.
  const auto p = two_blocks({0.0, 2.0, 0.0, 0.0});
  Direction d{{3.0, 4.0, 1.0, 1.0}, false};
  const auto n = filter_normalize(d, p);
  EXPECT_NEAR(n.values[0], 1.2, 1e-15);
  EXPECT_NEAR(n.values[1], 1.6, 1e-15);
  EXPECT_EQ(n.values[2], 0.0);  // zero theta block
  EXPECT_EQ(n.values[3], 0.0);
  EXPECT_TRUE(n.normalized);
}

TEST(FilterNormalize, ZeroDirectionBlockIsDegenerate) {
  const auto p = two_blocks({1.0, 2.0, 3.0, 4.0});
  EXPECT_THROW(filter_normalize(Direction{{1.0, 1.0, 0.0, 0.0}, false}, p), DegenerateDirection);
}

TEST(FilterNormalize, BlockNormsMatchOnRandomModels) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto m = model(s, s % 2 == 1);
    const std::size_t frozen[] = {m.first_dense_layer()};
    m.set_partition(m.parameters().partition.with_frozen_layers(frozen));
    const auto& p = m.parameters();
    const auto d = filter_normalize(sample_direction(p, s + 100), p);
    for (const auto& b : p.partition.blocks) {
      double nd = 0.0, nt = 0.0;
      for (std::size_t i = b.offset; i < b.offset + b.length; ++i) {
        nd += d.values[i] * d.values[i];
        nt += p.values[i] * p.values[i];
      }
      if (b.frozen) {
        EXPECT_EQ(nd, 0.0);
      } else {
        EXPECT_NEAR(std::sqrt(nd), std::sqrt(nt), 1e-12);
      }
    }
  }
}

TEST(SampleDirection, SeededAndFrozenAware) {
  auto m = model(1);
  const auto& p = m.parameters();
  EXPECT_EQ(sample_direction(p, 5).values, sample_direction(p, 5).values);
  EXPECT_NE(sample_direction(p, 5).values, sample_direction(p, 6).values);
  EXPECT_FALSE(sample_direction(p, 5).normalized);
  std::vector<std::size_t> all_layers{0, 1, 2};
  m.set_partition(p.partition.with_frozen_layers(all_layers));
  for (double x : sample_direction(m.parameters(), 5).values) EXPECT_EQ(x, 0.0);
}

TEST(SampleDirection, StandardNormalMoments) {
  ParameterVector p;
  p.values.assign(1000000, 1.0);
  p.partition.blocks = {{0, 0, 0, p.values.size(), false}};
  const auto d = sample_direction(p, 77);
  double s = 0.0, sq = 0.0;
  for (double x : d.values) {
    s += x;
    sq += x * x;
  }
  const double mean = s / d.values.size();
  EXPECT_LT(std::abs(mean), 0.01);
  EXPECT_LT(std::abs(std::sqrt(sq / d.values.size() - mean * mean) - 1.0), 0.01);
}

TEST(OrthogonalizePair, RawOutputsAreOrthogonal) {
  const auto m = model(2);
  const auto& p = m.parameters();
  const auto a = sample_direction(p, 1), b = sample_direction(p, 2);
  // Recompute the raw Gram-Schmidt residual independently.
  double aa = 0.0, ab = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    aa += a.values[i] * a.values[i];
    ab += a.values[i] * b.values[i];
  }
  std::vector<double> r(b.values.size());
  double dot = 0.0, nr = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b.values[i] - ab / aa * a.values[i];
  for (std::size_t i = 0; i < r.size(); ++i) {
    dot += r[i] * a.values[i];
    nr += r[i] * r[i];
  }
  EXPECT_LT(std::abs(dot), 1e-10 * std::sqrt(aa * nr));
  const auto [o1, o2] = orthogonalize_pair(a, b, p);
  const auto expected2 = filter_normalize(Direction{r, false}, p);
  for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(o2.values[i], expected2.values[i], 1e-12);
  EXPECT_EQ(o1.values, filter_normalize(a, p).values);
}

TEST(OrthogonalizePair, OrthogonalInputsOnlyNormalized) {
  const auto p = two_blocks({1.0, 1.0, 2.0, 2.0});
  const Direction a{{1.0, 0.0, 1.0, 0.0}, false}, b{{0.0, 1.0, 0.0, 1.0}, false};
  const auto [o1, o2] = orthogonalize_pair(a, b, p);
  EXPECT_EQ(o1.values, filter_normalize(a, p).values);
  EXPECT_EQ(o2.values, filter_normalize(b, p).values);
}

TEST(OrthogonalizePair, ParallelInputsRejected) {
  const auto m = model(3);
  const auto a = sample_direction(m.parameters(), 1);
  EXPECT_THROW(orthogonalize_pair(a, a, m.parameters()), DegenerateDirection);
}

TEST(UniformGrid, SymmetricMidpointIsZero) {
  const auto g = uniform_grid(-1.0, 1.0, 21);
  ASSERT_EQ(g.size(), 21u);
  EXPECT_EQ(g.front(), -1.0);
  EXPECT_EQ(g.back(), 1.0);
  EXPECT_EQ(g[10], 0.0);
  for (std::size_t i = 0; i < 21; ++i) EXPECT_EQ(g[i], -g[20 - i]);
  EXPECT_THROW(uniform_grid(1.0, -1.0, 3), InvalidArgument);
}

TEST(Scan1d, EvaluationCountWithAndWithoutCache) {
  const auto m = model(4);
  std::atomic<std::size_t> calls{0};
  const auto loss = quadratic_bowl(m.parameters().values, &calls);
  const auto grid = uniform_grid(-1, 1, 7);
  auto p = scan_1d(m.parameters().values, m.parameters().partition, loss, 5, grid, 1);
  EXPECT_EQ(calls.load(), 5u * 6 + 1);
  EXPECT_EQ(p.meta.evaluations, 31u);
  LandscapeOptions no_cache;
  no_cache.cache_origin = false;
  calls = 0;
  p = scan_1d(m.parameters().values, m.parameters().partition, loss, 5, grid, 1, no_cache);
  EXPECT_EQ(calls.load(), 35u);
}

TEST(Scan1d, QuadraticProfileIsSymmetric) {
  const auto m = model(5);
  const auto grid = uniform_grid(-1, 1, 11);
  const auto p = scan_1d(m.parameters().values, m.parameters().partition, quadratic_bowl(m.parameters().values), 8,
                         grid, 3);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(p.mean_energy[i], p.mean_energy[grid.size() - 1 - i], 1e-10 * (1 + p.mean_energy[i]));
    EXPECT_NEAR(p.mean_force[i], p.mean_force[grid.size() - 1 - i], 1e-10 * (1 + p.mean_force[i]));
  }
  EXPECT_EQ(p.mean_energy[5], 0.0);
}

TEST(Scan1d, MeansArePermutationInvariant) {
  const auto m = model(6);
  auto p = scan_1d(m.parameters().values, m.parameters().partition, quadratic_bowl(m.parameters().values), 9,
                   uniform_grid(-1, 1, 5), 4);
  const auto before = p.mean_energy;
  std::mt19937 rng(1);
  std::vector<std::size_t> perm(9);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto e = p.energy, f = p.force;
  for (std::size_t n = 0; n < 9; ++n) {
    p.energy[n] = e[perm[n]];
    p.force[n] = f[perm[n]];
  }
  p.recompute_means();
  for (std::size_t t = 0; t < before.size(); ++t) EXPECT_NEAR(p.mean_energy[t], before[t], 1e-10 * (1 + before[t]));
}

TEST(Scan1d, FrozenBlocksNeverMove) {
  const auto m = model(7, true);
  const auto theta = m.parameters().values;
  LandscapeOptions opt;
  opt.frozen_layers = {0};
  const auto frozen = m.parameters().partition.with_frozen_layers(opt.frozen_layers);
  std::atomic<std::size_t> violations{0};
  const LossFunction loss = [&](std::span<const double> q) {
    for (auto k : frozen.frozen_block_indices()) {
      const auto& b = frozen.blocks[k];
      for (std::size_t i = b.offset; i < b.offset + b.length; ++i)
        if (q[i] != theta[i]) ++violations;
    }
    return LossPoint{1.0, 1.0};
  };
  const auto p = scan_1d(theta, m.parameters().partition, loss, 4, uniform_grid(-1, 1, 5), 2, opt);
  EXPECT_EQ(violations.load(), 0u);
  EXPECT_EQ(p.meta.frozen_blocks, frozen.frozen_block_indices());
}

TEST(Scan1d, FailuresBecomeInfinitySentinels) {
  const auto m = model(8);
  const auto theta = m.parameters().values;
  // One side of the origin throws, the other returns NaN.
  const LossFunction loss = [&](std::span<const double> q) -> LossPoint {
    double shift = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) shift += q[i] - theta[i];
    if (shift > 0.0) throw NumericError("blow-up");
    return {shift < 0.0 ? NAN : 1.0, 1.0};
  };
  const auto p = scan_1d(theta, m.parameters().partition, loss, 1, {-1.0, 0.0, 1.0}, 1);
  EXPECT_EQ(p.meta.failed_points, 2u);
  EXPECT_TRUE(std::isinf(p.energy[0][0]));
  EXPECT_TRUE(std::isinf(p.energy[0][2]));
  EXPECT_EQ(p.energy[0][1], 1.0);
}

TEST(Scan1d, GridMustContainZero) {
  const auto m = model(9);
  EXPECT_THROW(scan_1d(m.parameters().values, m.parameters().partition, quadratic_bowl(m.parameters().values), 1,
                       {-1.0, 1.0}, 1),
               InvalidArgument);
  EXPECT_THROW(scan_1d(m.parameters().values, m.parameters().partition, quadratic_bowl(m.parameters().values), 1,
                       {0.0, -1.0}, 1),
               InvalidArgument);
}

class ModelLandscape : public ::testing::Test {
 protected:
  ReferencePotential ref = testing::morse_reference();
  Dataset data = testing::labelled_clusters(ref, 5, 4, 12, "fixture");
  NeuralPotential m = fit_rescale(model(10), data);
};

TEST_F(ModelLandscape, OriginMatchesDirectLoss) {
  const auto grid = uniform_grid(-0.5, 0.5, 5);
  const auto p = landscape_1d(m, data, 3, grid, 7);
  const auto direct = loss_eval(m, data);
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_EQ(p.energy[n][2], direct.loss_energy);
    EXPECT_EQ(p.force[n][2], direct.loss_force);
  }
  EXPECT_EQ(p.meta.dataset_id, "fixture");
}

TEST_F(ModelLandscape, SingleDirectionMeanEqualsCurve) {
  const auto p = landscape_1d(m, data, 1, uniform_grid(-0.5, 0.5, 5), 7);
  EXPECT_EQ(p.mean_energy, p.energy[0]);
  EXPECT_EQ(p.mean_force, p.force[0]);
}

TEST_F(ModelLandscape, ParallelMatchesSerial) {
  const auto grid = uniform_grid(-1, 1, 9);
  LandscapeOptions par;
  par.threads = 4;
  const auto a = landscape_1d(m, data, 4, grid, 3);
  const auto b = landscape_1d(m, data, 4, grid, 3, par);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    EXPECT_NEAR(a.mean_energy[t], b.mean_energy[t], 1e-10 * a.mean_energy[t]);
    EXPECT_NEAR(a.mean_force[t], b.mean_force[t], 1e-10 * a.mean_force[t]);
  }
  EXPECT_EQ(profile_csv(a), profile_csv(b));
}

TEST_F(ModelLandscape, SurfaceConsistency) {
  const std::vector<double> g{-0.5, 0.0, 0.5};
  const auto s = landscape_2d(m, data, g, g, 5);
  EXPECT_EQ(s.meta.evaluations, 9u);
  const auto direct = loss_eval(m, data);
  EXPECT_EQ(s.energy_at(1, 1), direct.loss_energy);
  EXPECT_EQ(s.force_at(1, 1), direct.loss_force);
  // The t2 = 0 column follows the first 1D direction.
  const auto p = landscape_1d(m, data, 1, g, 5);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(s.energy_at(i, 1), p.energy[0][i]);
    EXPECT_EQ(s.force_at(i, 1), p.force[0][i]);
  }
}

TEST_F(ModelLandscape, ReweightingIsLinear) {
  const std::vector<double> g{-0.5, 0.0, 0.5};
  const auto s = landscape_2d(m, data, g, g, 5);
  EXPECT_EQ(reweight_surface(s, 1, 0), s.energy);
  EXPECT_EQ(reweight_surface(s, 1, 10), reweight_surface(s, 1, 10));
  const auto c12 = reweight_surface(s, 1, 2), c10 = reweight_surface(s, 1, 0), c01 = reweight_surface(s, 0, 1);
  for (std::size_t k = 0; k < c12.size(); ++k) EXPECT_NEAR(c12[k], c10[k] + 2 * c01[k], 1e-12 * c12[k]);
  EXPECT_THROW(reweight_surface(s, -1, 1), InvalidArgument);
}

TEST_F(ModelLandscape, InterpolationEndpointsAndMidpoint) {
  const auto other = fit_rescale(model(11), data);
  const std::vector<double> g{0.0, 0.5, 1.0};
  const auto p = interpolate_models(m, other, data, g);
  EXPECT_NEAR(p.energy[0][0], loss_eval(m, data).loss_energy, 1e-12);
  EXPECT_NEAR(p.force[0][2], loss_eval(other, data).loss_force, 1e-12);
  EXPECT_EQ(p.meta.kind, "interpolation");
  // Midpoint model built by hand from the coordinate-wise mean.
  std::vector<double> mid(m.n_parameters());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 0.5 * m.parameters().values[i] + 0.5 * other.parameters().values[i];
  auto mm = m.with_parameter_values(mid);
  mm.set_rescale(Rescale{0.5 * (m.rescale().scale + other.rescale().scale),
                         0.5 * (m.rescale().shift + other.rescale().shift), true});
  EXPECT_NEAR(p.energy[0][1], loss_eval(mm, data).loss_energy, 1e-12);
}

TEST_F(ModelLandscape, InterpolatingAModelWithItselfIsFlat) {
  const auto p = interpolate_models(m, m, data, uniform_grid(-1, 2, 7));
  for (double v : p.force[0]) EXPECT_NEAR(v, p.force[0][0], 1e-12 * v);
  const NeuralPotential wider(DescriptorSpec::uniform(5, 4.0), {7, 4}, Rescale{}, 1);
  EXPECT_THROW(interpolate_models(m, wider, data, {0.0, 1.0}), InvalidArgument);
}

TEST_F(ModelLandscape, ArtifactsRoundTrip) {
  const auto p = landscape_1d(m, data, 2, uniform_grid(-1, 1, 5), 9);
  const auto csv = profile_csv(p);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "direction,t,loss_energy_mev_per_atom,loss_force_mev_per_ang");
  const auto back = profile_from_csv(csv);
  EXPECT_EQ(back.energy, p.energy);
  EXPECT_EQ(back.mean_force, p.mean_force);
  EXPECT_EQ(back.t_grid, p.t_grid);
  const auto meta = nlohmann::json::parse(profile_metadata_json(p));
  EXPECT_EQ(meta["seed"], 9);
  EXPECT_EQ(meta["n_directions"], 2);
  const std::vector<double> g{-0.5, 0.0, 0.5};
  const auto s = landscape_2d(m, data, g, g, 5);
  const auto scsv = surface_csv(s);
  EXPECT_EQ(scsv.substr(0, scsv.find('\n')), "t1,t2,loss_energy,loss_force");
  EXPECT_EQ(std::count(scsv.begin(), scsv.end(), '\n'), 10);
  EXPECT_NO_THROW(nlohmann::json::parse(surface_metadata_json(s)));
  EXPECT_THROW(profile_from_csv("bad header\n"), IoError);
}

}  // namespace
}  // namespace nnipls
