#include <gtest/gtest.h>

#include <cmath>

#include "nnipls/errors.hpp"
#include "nnipls/loss.hpp"
#include "nnipls/neural_potential.hpp"
#include "test_support.hpp"

namespace nnipls {
namespace {

/// Returns fixed predictions regardless of input.
class FixedModel : public ForceModel {
 public:
  FixedModel(double e, std::vector<Vec3> f) : e_(e), f_(std::move(f)) {}
  Evaluation evaluate(const Configuration&) const override { return {e_, f_}; }

 private:
  double e_;
  std::vector<Vec3> f_;
};

Configuration one_atom_labelled() {
  Configuration c;
  c.positions = {{0, 0, 0}};
  c.species = {"H"};
  c.energy = -1.0;
  c.forces = std::vector<Vec3>{{0.1, 0.2, 0.3}};
  return c;
}

TEST(LossEval, HandComputedOneAtomFrame) {
  const Dataset d("one", {one_atom_labelled()});
  const FixedModel m(-1.0 + 0.004, {{0.1 + 0.003, 0.2, 0.3}});
  const auto l = loss_eval(m, d);
  EXPECT_NEAR(l.loss_energy, 4.0, 1e-9);
  EXPECT_NEAR(l.loss_force, 3.0 / std::sqrt(3.0), 1e-9);
  EXPECT_NEAR(l.mse_energy, 16e-6, 1e-15);
  EXPECT_NEAR(l.mse_force, 3e-6, 1e-15);
  EXPECT_NEAR(l.combined, 16e-6 + 1000 * 3e-6, 1e-15);
}

TEST(LossEval, ExactModelGivesZero) {
  const auto ref = testing::morse_reference();
  const auto l = loss_eval(ref, testing::labelled_clusters(ref, 4, 3, 1));
  EXPECT_EQ(l.loss_energy, 0.0);
  EXPECT_EQ(l.loss_force, 0.0);
  EXPECT_EQ(l.combined, 0.0);
}

TEST(LossEval, DoublingForceWeightDoublesForceTerm) {
  const auto ref = testing::morse_reference();
  const auto d = testing::labelled_clusters(ref, 4, 4, 2);
  const NeuralPotential m(DescriptorSpec::uniform(4, 4.0), {5}, Rescale{}, 3);
  const auto a = loss_eval(m, d, {1.0, 1000.0});
  const auto b = loss_eval(m, d, {1.0, 2000.0});
  EXPECT_EQ(a.loss_energy, b.loss_energy);
  EXPECT_EQ(a.loss_force, b.loss_force);
  EXPECT_NEAR(b.combined - a.combined, 1000.0 * a.mse_force, 1e-12 * b.combined);
}

TEST(LossEval, SubsetAndThreadsAgree) {
  const auto ref = testing::morse_reference();
  const auto d = testing::labelled_clusters(ref, 9, 4, 3);
  const NeuralPotential m(DescriptorSpec::uniform(4, 4.0), {5}, Rescale{}, 3);
  const std::vector<std::size_t> sub{1, 4, 7};
  const auto one = loss_eval(m, d, {}, sub, 1);
  const auto many = loss_eval(m, d, {}, sub, 4);
  EXPECT_EQ(one.combined, many.combined);
  EXPECT_EQ(one.n_frames, 3u);
  EXPECT_EQ(loss_eval(m, d, {}, {}, 3).n_components, 9u * 4 * 3);
}

TEST(LossEval, MissingLabelsRaise) {
  Configuration c = one_atom_labelled();
  c.forces.reset();
  c.energy.reset();
  const Dataset d("bare", {c});
  EXPECT_THROW(loss_eval(testing::morse_reference(), d), InvalidArgument);
}

TEST(LossAndGradient, MatchesFiniteDifferences) {
  const auto ref = testing::morse_reference();
  const auto d = testing::labelled_clusters(ref, 3, 4, 5);
  for (bool trainable : {false, true}) {
    const NeuralPotential m(DescriptorSpec::uniform(5, 4.0, trainable), {6, 4}, Rescale{0.8, -1.0, true}, 11);
    const LossWeights w{1.0, 10.0};
    const auto g = loss_and_gradient(m, d, w);
    EXPECT_DOUBLE_EQ(g.loss.combined, loss_eval(m, d, w).combined);
    double scale = 0.0, err = 0.0;
    auto v = m.parameters().values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::abs(v[i]));
      auto p = v, q = v;
      p[i] += h;
      q[i] -= h;
      const double fd =
          (loss_eval(m.with_parameter_values(p), d, w).combined - loss_eval(m.with_parameter_values(q), d, w).combined) /
          (2 * h);
      scale = std::max(scale, std::abs(g.gradient[i]));
      err = std::max(err, std::abs(fd - g.gradient[i]));
    }
    EXPECT_LT(err / scale, 1e-5) << "trainable=" << trainable;
  }
}

TEST(LossAndGradient, IndependentOfThreadCount) {
  const auto ref = testing::morse_reference();
  const auto d = testing::labelled_clusters(ref, 8, 4, 6);
  const NeuralPotential m(DescriptorSpec::uniform(5, 4.0), {6}, Rescale{}, 1);
  const auto a = loss_and_gradient(m, d, {}, {}, 1);
  const auto b = loss_and_gradient(m, d, {}, {}, 4);
  EXPECT_EQ(a.gradient, b.gradient);
  EXPECT_EQ(a.loss.combined, b.loss.combined);
}

TEST(SquaredErrors, PoolingIsCountWeighted) {
  SquaredErrors a{4e-6, 9e-6, 1, 3};
  SquaredErrors b{0.0, 3e-6, 2, 6};
  a += b;
  const auto l = a.to_loss({});
  EXPECT_NEAR(l.loss_energy, std::sqrt(4e-6 / 3) * 1000, 1e-12);
  EXPECT_NEAR(l.loss_force, std::sqrt(12e-6 / 9) * 1000, 1e-12);
}

}  // namespace
}  // namespace nnipls
