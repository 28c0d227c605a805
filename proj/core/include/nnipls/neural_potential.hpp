#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nnipls/descriptors.hpp"
#include "nnipls/force_model.hpp"

namespace nnipls {

/// One filter: a contiguous slice of the flat parameter vector. For a dense
/// layer a filter is one output neuron (its incoming weight row followed by
/// its bias). Layer 0 holds the trainable radial basis (centers, widths) when present.
struct FilterBlock {
  std::size_t layer = 0;
  std::size_t filter = 0;
  std::size_t offset = 0;
  std::size_t length = 0;
  bool frozen = false;
};

struct FilterPartition {
  std::vector<FilterBlock> blocks;

  std::size_t total_length() const;
  /// Throws unless the blocks tile [0, n) exactly, in order and without gaps.
  void validate(std::size_t n) const;
  /// Copy with every block of the listed layers marked frozen.
  FilterPartition with_frozen_layers(std::span<const std::size_t> layers) const;
  std::vector<std::size_t> frozen_block_indices() const;
};

struct ParameterVector {
  std::vector<double> values;
  FilterPartition partition;

  std::size_t size() const { return values.size(); }
  void validate() const;
};

/// Affine output transform: E = scale * sum_i net(G_i) + shift * N when enabled.
struct Rescale {
  double scale = 1.0;  // eV
  double shift = 0.0;  // eV/atom
  bool enabled = false;

  double effective_scale() const { return enabled ? scale : 1.0; }
  double effective_shift() const { return enabled ? shift : 0.0; }
};

struct NeuralEvaluation {
  double energy = 0.0;
  std::vector<Vec3> forces;
  std::vector<double> per_atom_energies;
};

/// Atom-centred MLP potential on radial descriptors with shifted-softplus
/// activations, ln(1 + e^x) - ln 2, which are smooth to all orders.
class NeuralPotential : public ForceModel {
 public:
  NeuralPotential(DescriptorSpec descriptor, std::vector<std::size_t> hidden_widths, Rescale rescale,
                  std::uint64_t seed);
  NeuralPotential(DescriptorSpec descriptor, std::vector<std::size_t> hidden_widths, Rescale rescale,
                  ParameterVector params);

  /// Eight radial functions, two hidden layers of 16.
  static NeuralPotential default_model(std::uint64_t seed, double cutoff = 5.0, bool trainable_basis = false);

  const DescriptorSpec& descriptor() const { return descriptor_; }
  /// Descriptor with centers/widths taken from the parameters when trainable.
  DescriptorSpec effective_descriptor() const;
  const std::vector<std::size_t>& hidden_widths() const { return hidden_; }
  const Rescale& rescale() const { return rescale_; }
  void set_rescale(const Rescale& r) { rescale_ = r; }
  static constexpr const char* activation() { return "shifted_softplus"; }

  const ParameterVector& parameters() const { return params_; }
  std::size_t n_parameters() const { return params_.values.size(); }
  void set_parameter_values(std::span<const double> values);
  NeuralPotential with_parameter_values(std::span<const double> values) const;
  void set_partition(FilterPartition partition);

  /// Index of the first dense layer in the partition (1 when the basis is trainable, else 0).
  std::size_t first_dense_layer() const { return descriptor_.trainable_basis ? 1 : 0; }

  /// Keeps trainable basis widths/centers inside their valid domain.
  void project_constraints(std::span<double> values) const;

  /// Energy, forces (exact negative gradient) and per-atom energies.
  /// Throws NumericError naming the atom when an intermediate is non-finite.
  NeuralEvaluation nn_eval(const Configuration& c) const;
  Evaluation evaluate(const Configuration& c) const override;

  /// Adds to `grad` the parameter gradient of
  ///   energy_adjoint * E(theta) + sum_a force_adjoint[a] . F_a(theta).
  void accumulate_gradient(const Configuration& c, double energy_adjoint, std::span<const Vec3> force_adjoint,
                           std::span<double> grad) const;

 private:
  void build_partition();

  DescriptorSpec descriptor_;
  std::vector<std::size_t> hidden_;
  Rescale rescale_;
  ParameterVector params_;
  std::vector<std::size_t> dims_;          // n_radial, hidden..., 1
  std::vector<std::size_t> layer_offset_;  // start of each dense layer
};

/// shift = mean per-atom energy, scale = std of force components; enables rescaling.
NeuralPotential fit_rescale(const NeuralPotential& m, const Dataset& d);

}  // namespace nnipls
