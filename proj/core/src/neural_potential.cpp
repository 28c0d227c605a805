#include "nnipls/neural_potential.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nnipls/errors.hpp"
#include "nnipls/neighbors.hpp"
#include "nnipls/random.hpp"

namespace nnipls {

std::size_t FilterPartition::total_length() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.length;
  return n;
}

void FilterPartition::validate(std::size_t n) const {
  std::size_t next = 0;
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const auto& b = blocks[k];
    if (b.offset != next)
      throw InvalidArgument("filter block " + std::to_string(k) + " starts at " + std::to_string(b.offset) +
                            ", expected " + std::to_string(next));
    if (b.length == 0) throw InvalidArgument("filter block " + std::to_string(k) + " is empty");
    next += b.length;
  }
  if (next != n)
    throw InvalidArgument("filter blocks cover " + std::to_string(next) + " of " + std::to_string(n) + " parameters");
}

FilterPartition FilterPartition::with_frozen_layers(std::span<const std::size_t> layers) const {
  FilterPartition out = *this;
  for (auto& b : out.blocks)
    if (std::find(layers.begin(), layers.end(), b.layer) != layers.end()) b.frozen = true;
  return out;
}

std::vector<std::size_t> FilterPartition::frozen_block_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < blocks.size(); ++k)
    if (blocks[k].frozen) out.push_back(k);
  return out;
}

void ParameterVector::validate() const {
  partition.validate(values.size());
  for (double v : values)
    if (!std::isfinite(v)) throw NumericError("parameter vector contains a non-finite value");
}

namespace {

inline double ssp(double x) {
  // log1p(exp(x)) without overflow, minus log 2.
  return (x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x))) - std::log(2.0);
}
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Per-atom forward state of the MLP with an optional tangent (forward-mode) lane.
struct Trace {
  std::vector<std::vector<double>> a;      // activations per layer input; a[0] = descriptors
  std::vector<std::vector<double>> z;      // pre-activations of hidden layers
  std::vector<std::vector<double>> a_dot;  // tangent lane
  std::vector<std::vector<double>> z_dot;
  double y = 0.0;
  double y_dot = 0.0;
};

class Network {
 public:
  Network(std::span<const double> params, const std::vector<std::size_t>& dims,
          const std::vector<std::size_t>& offsets)
      : p_(params), dims_(dims), off_(offsets) {}

  std::size_t n_dense() const { return dims_.size() - 1; }
  const double* row(std::size_t l, std::size_t j) const { return p_.data() + off_[l] + j * (dims_[l] + 1); }

  void forward(std::span<const double> input, std::span<const double> tangent, Trace& t) const {
    const bool with_tangent = !tangent.empty();
    const std::size_t hidden = n_dense() - 1;
    t.a.resize(hidden + 1);
    t.z.resize(hidden);
    t.a[0].assign(input.begin(), input.end());
    if (with_tangent) {
      t.a_dot.resize(hidden + 1);
      t.z_dot.resize(hidden);
      t.a_dot[0].assign(tangent.begin(), tangent.end());
    }
    for (std::size_t l = 0; l < hidden; ++l) {
      const std::size_t in = dims_[l];
      const std::size_t out = dims_[l + 1];
      t.z[l].resize(out);
      t.a[l + 1].resize(out);
      if (with_tangent) {
        t.z_dot[l].resize(out);
        t.a_dot[l + 1].resize(out);
      }
      for (std::size_t j = 0; j < out; ++j) {
        const double* w = row(l, j);
        double z = w[in];
        double zd = 0.0;
        for (std::size_t k = 0; k < in; ++k) z += w[k] * t.a[l][k];
        if (with_tangent)
          for (std::size_t k = 0; k < in; ++k) zd += w[k] * t.a_dot[l][k];
        t.z[l][j] = z;
        t.a[l + 1][j] = ssp(z);
        if (with_tangent) {
          t.z_dot[l][j] = zd;
          t.a_dot[l + 1][j] = sigmoid(z) * zd;
        }
      }
    }
    const std::size_t in = dims_[hidden];
    const double* w = row(hidden, 0);
    t.y = w[in];
    t.y_dot = 0.0;
    for (std::size_t k = 0; k < in; ++k) t.y += w[k] * t.a[hidden][k];
    if (with_tangent)
      for (std::size_t k = 0; k < in; ++k) t.y_dot += w[k] * t.a_dot[hidden][k];
  }

  // dy/d(input) for a primal-only trace.
  void input_gradient(const Trace& t, std::vector<double>& g, std::vector<double>& scratch) const {
    const std::size_t hidden = n_dense() - 1;
    const double* w = row(hidden, 0);
    g.assign(w, w + dims_[hidden]);
    for (std::size_t l = hidden; l-- > 0;) {
      const std::size_t in = dims_[l];
      const std::size_t out = dims_[l + 1];
      scratch.assign(in, 0.0);
      for (std::size_t j = 0; j < out; ++j) {
        const double dz = g[j] * sigmoid(t.z[l][j]);
        const double* wr = row(l, j);
        for (std::size_t k = 0; k < in; ++k) scratch[k] += wr[k] * dz;
      }
      g.swap(scratch);
    }
  }

  // Reverse pass for J = c_y * y + c_ydot * y_dot through both lanes.
  // Adds parameter adjoints into `grad` (full vector) and returns input adjoints.
  void reverse(const Trace& t, double c_y, double c_ydot, std::span<double> grad, std::vector<double>& in_bar,
               std::vector<double>& in_dot_bar) const {
    const std::size_t hidden = n_dense() - 1;
    const std::size_t in_last = dims_[hidden];
    const double* w = row(hidden, 0);
    double* gw = grad.data() + off_[hidden];
    std::vector<double> a_bar(in_last), ad_bar(in_last);
    for (std::size_t k = 0; k < in_last; ++k) {
      a_bar[k] = c_y * w[k];
      ad_bar[k] = c_ydot * w[k];
      gw[k] += c_y * t.a[hidden][k] + c_ydot * t.a_dot[hidden][k];
    }
    gw[in_last] += c_y;

    std::vector<double> prev_bar, prev_dot_bar;
    for (std::size_t l = hidden; l-- > 0;) {
      const std::size_t in = dims_[l];
      const std::size_t out = dims_[l + 1];
      prev_bar.assign(in, 0.0);
      prev_dot_bar.assign(in, 0.0);
      for (std::size_t j = 0; j < out; ++j) {
        const double s = sigmoid(t.z[l][j]);
        const double ds = s * (1.0 - s);
        const double z_bar = a_bar[j] * s + ad_bar[j] * ds * t.z_dot[l][j];
        const double zd_bar = ad_bar[j] * s;
        const double* wr = row(l, j);
        double* gr = grad.data() + off_[l] + j * (in + 1);
        for (std::size_t k = 0; k < in; ++k) {
          gr[k] += z_bar * t.a[l][k] + zd_bar * t.a_dot[l][k];
          prev_bar[k] += wr[k] * z_bar;
          prev_dot_bar[k] += wr[k] * zd_bar;
        }
        gr[in] += z_bar;
      }
      a_bar.swap(prev_bar);
      ad_bar.swap(prev_dot_bar);
    }
    in_bar = std::move(a_bar);
    in_dot_bar = std::move(ad_bar);
  }

 private:
  std::span<const double> p_;
  const std::vector<std::size_t>& dims_;
  const std::vector<std::size_t>& off_;
};

struct PairTerms {
  std::vector<NeighborPair> pairs;
  std::vector<double> phi;   // pairs x K
  std::vector<double> dphi;  // pairs x K
  std::vector<double> fc;
  std::vector<double> dfc;
};

PairTerms pair_terms(const Configuration& c, const DescriptorSpec& spec) {
  PairTerms t;
  t.pairs = full_neighbor_list(c, spec.cutoff);
  const std::size_t K = spec.n_radial();
  t.phi.resize(t.pairs.size() * K);
  t.dphi.resize(t.pairs.size() * K);
  t.fc.resize(t.pairs.size());
  t.dfc.resize(t.pairs.size());
  for (std::size_t p = 0; p < t.pairs.size(); ++p) {
    const auto fc = cutoff_function(t.pairs[p].r, spec.cutoff);
    t.fc[p] = fc.f;
    t.dfc[p] = fc.df;
    for (std::size_t k = 0; k < K; ++k) {
      const auto rt = radial_term(t.pairs[p].r, spec.centers[k], spec.widths[k], fc);
      t.phi[p * K + k] = rt.phi;
      t.dphi[p * K + k] = rt.dphi;
    }
  }
  return t;
}

}  // namespace

NeuralPotential::NeuralPotential(DescriptorSpec descriptor, std::vector<std::size_t> hidden_widths, Rescale rescale,
                                 std::uint64_t seed)
    : descriptor_(std::move(descriptor)), hidden_(std::move(hidden_widths)), rescale_(rescale) {
  descriptor_.validate();
  build_partition();
  auto& v = params_.values;
  v.assign(params_.partition.total_length(), 0.0);
  const std::size_t K = descriptor_.n_radial();
  if (descriptor_.trainable_basis) {
    std::copy(descriptor_.centers.begin(), descriptor_.centers.end(), v.begin());
    std::copy(descriptor_.widths.begin(), descriptor_.widths.end(), v.begin() + static_cast<std::ptrdiff_t>(K));
  }
  Rng rng = make_rng(seed, "model.init");
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const std::size_t in = dims_[l];
    const double std = 1.0 / std::sqrt(static_cast<double>(in));
    for (std::size_t j = 0; j < dims_[l + 1]; ++j) {
      double* r = v.data() + layer_offset_[l] + j * (in + 1);
      for (std::size_t k = 0; k < in; ++k) r[k] = std * normal(rng);
      r[in] = 0.0;
    }
  }
}

NeuralPotential::NeuralPotential(DescriptorSpec descriptor, std::vector<std::size_t> hidden_widths, Rescale rescale,
                                 ParameterVector params)
    : descriptor_(std::move(descriptor)), hidden_(std::move(hidden_widths)), rescale_(rescale) {
  descriptor_.validate();
  build_partition();
  if (params.values.size() != params_.partition.total_length())
    throw InvalidArgument("parameter count " + std::to_string(params.values.size()) + " does not match architecture (" +
                          std::to_string(params_.partition.total_length()) + ")");
  if (!params.partition.blocks.empty()) {
    params.partition.validate(params.values.size());
    if (params.partition.blocks.size() != params_.partition.blocks.size())
      throw InvalidArgument("filter partition does not match architecture");
    for (std::size_t k = 0; k < params.partition.blocks.size(); ++k) {
      const auto& a = params.partition.blocks[k];
      const auto& b = params_.partition.blocks[k];
      if (a.layer != b.layer || a.filter != b.filter || a.offset != b.offset || a.length != b.length)
        throw InvalidArgument("filter block " + std::to_string(k) + " does not match architecture");
    }
    params_.partition = std::move(params.partition);
  }
  params_.values = std::move(params.values);
  params_.validate();
}

NeuralPotential NeuralPotential::default_model(std::uint64_t seed, double cutoff, bool trainable_basis) {
  return NeuralPotential(DescriptorSpec::uniform(8, cutoff, trainable_basis), {16, 16}, Rescale{}, seed);
}

void NeuralPotential::build_partition() {
  if (hidden_.empty()) throw InvalidArgument("neural potential needs at least one hidden layer");
  for (auto w : hidden_)
    if (w == 0) throw InvalidArgument("hidden layer width must be > 0");
  dims_.clear();
  dims_.push_back(descriptor_.n_radial());
  dims_.insert(dims_.end(), hidden_.begin(), hidden_.end());
  dims_.push_back(1);

  auto& blocks = params_.partition.blocks;
  blocks.clear();
  std::size_t offset = 0;
  std::size_t layer = 0;
  const std::size_t K = descriptor_.n_radial();
  if (descriptor_.trainable_basis) {
    blocks.push_back({layer, 0, offset, K, false});
    offset += K;
    blocks.push_back({layer, 1, offset, K, false});
    offset += K;
    ++layer;
  }
  layer_offset_.clear();
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l, ++layer) {
    layer_offset_.push_back(offset);
    for (std::size_t j = 0; j < dims_[l + 1]; ++j) {
      blocks.push_back({layer, j, offset, dims_[l] + 1, false});
      offset += dims_[l] + 1;
    }
  }
}

DescriptorSpec NeuralPotential::effective_descriptor() const {
  DescriptorSpec s = descriptor_;
  if (s.trainable_basis) {
    const std::size_t K = s.n_radial();
    const auto& v = params_.values;
    std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(K), s.centers.begin());
    std::copy(v.begin() + static_cast<std::ptrdiff_t>(K), v.begin() + static_cast<std::ptrdiff_t>(2 * K),
              s.widths.begin());
  }
  return s;
}

void NeuralPotential::set_parameter_values(std::span<const double> values) {
  if (values.size() != params_.values.size()) throw InvalidArgument("parameter vector length mismatch");
  params_.values.assign(values.begin(), values.end());
}

NeuralPotential NeuralPotential::with_parameter_values(std::span<const double> values) const {
  NeuralPotential m = *this;
  m.set_parameter_values(values);
  return m;
}

void NeuralPotential::set_partition(FilterPartition partition) {
  partition.validate(params_.values.size());
  params_.partition = std::move(partition);
}

void NeuralPotential::project_constraints(std::span<double> values) const {
  if (!descriptor_.trainable_basis) return;
  const std::size_t K = descriptor_.n_radial();
  constexpr double kMin = 1e-6;
  for (std::size_t k = 0; k < K; ++k) {
    values[k] = std::clamp(values[k], kMin, descriptor_.cutoff);
    values[K + k] = std::max(values[K + k], kMin);
  }
}

NeuralEvaluation NeuralPotential::nn_eval(const Configuration& c) const {
  const auto spec = effective_descriptor();
  const std::size_t n = c.size();
  const std::size_t K = spec.n_radial();
  const auto terms = pair_terms(c, spec);

  std::vector<double> G(n * K, 0.0);
  for (std::size_t p = 0; p < terms.pairs.size(); ++p)
    for (std::size_t k = 0; k < K; ++k) G[terms.pairs[p].i * K + k] += terms.phi[p * K + k];

  const Network net(params_.values, dims_, layer_offset_);
  const double scale = rescale_.effective_scale();
  const double shift = rescale_.effective_shift();

  NeuralEvaluation out;
  out.per_atom_energies.resize(n);
  out.forces.assign(n, Vec3{0.0, 0.0, 0.0});
  std::vector<double> dG(n * K);
  Trace trace;
  std::vector<double> g, scratch;
  for (std::size_t i = 0; i < n; ++i) {
    net.forward(std::span<const double>(G).subspan(i * K, K), {}, trace);
    if (!std::isfinite(trace.y)) throw NumericError("non-finite network output at atom " + std::to_string(i));
    out.per_atom_energies[i] = scale * trace.y + shift;
    out.energy += out.per_atom_energies[i];
    net.input_gradient(trace, g, scratch);
    std::copy(g.begin(), g.end(), dG.begin() + static_cast<std::ptrdiff_t>(i * K));
  }
  for (std::size_t p = 0; p < terms.pairs.size(); ++p) {
    const auto& pr = terms.pairs[p];
    double coef = 0.0;
    for (std::size_t k = 0; k < K; ++k) coef += dG[pr.i * K + k] * terms.dphi[p * K + k];
    const Vec3 f = (scale * coef) * pr.unit;
    out.forces[pr.i] += f;
    out.forces[pr.j] -= f;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (double x : out.forces[i])
      if (!std::isfinite(x)) throw NumericError("non-finite force at atom " + std::to_string(i));
  return out;
}

Evaluation NeuralPotential::evaluate(const Configuration& c) const {
  auto e = nn_eval(c);
  return Evaluation{e.energy, std::move(e.forces)};
}

void NeuralPotential::accumulate_gradient(const Configuration& c, double energy_adjoint,
                                          std::span<const Vec3> force_adjoint, std::span<double> grad) const {
  if (grad.size() != params_.values.size()) throw InvalidArgument("gradient buffer length mismatch");
  if (force_adjoint.size() != c.size()) throw InvalidArgument("force adjoint length mismatch");
  const auto spec = effective_descriptor();
  const std::size_t n = c.size();
  const std::size_t K = spec.n_radial();
  const auto terms = pair_terms(c, spec);
  const std::size_t n_pairs = terms.pairs.size();

  // proj[p] = unit . (rho_j - rho_i); U = directional derivative of G along rho.
  std::vector<double> proj(n_pairs);
  std::vector<double> G(n * K, 0.0), U(n * K, 0.0);
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const auto& pr = terms.pairs[p];
    proj[p] = dot(pr.unit, force_adjoint[pr.j] - force_adjoint[pr.i]);
    for (std::size_t k = 0; k < K; ++k) {
      G[pr.i * K + k] += terms.phi[p * K + k];
      U[pr.i * K + k] += terms.dphi[p * K + k] * proj[p];
    }
  }

  // sum_a rho_a . F_a = -scale * sum_i dnet(G_i)[U_i]
  const double scale = rescale_.effective_scale();
  const Network net(params_.values, dims_, layer_offset_);
  Trace trace;
  std::vector<double> g_bar, u_bar;
  std::vector<double> G_bar, U_bar;
  if (spec.trainable_basis) {
    G_bar.assign(n * K, 0.0);
    U_bar.assign(n * K, 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    net.forward(std::span<const double>(G).subspan(i * K, K), std::span<const double>(U).subspan(i * K, K), trace);
    net.reverse(trace, energy_adjoint * scale, -scale, grad, g_bar, u_bar);
    if (spec.trainable_basis) {
      std::copy(g_bar.begin(), g_bar.end(), G_bar.begin() + static_cast<std::ptrdiff_t>(i * K));
      std::copy(u_bar.begin(), u_bar.end(), U_bar.begin() + static_cast<std::ptrdiff_t>(i * K));
    }
  }

  if (!spec.trainable_basis) return;
  double* g_center = grad.data();
  double* g_width = grad.data() + K;
  for (std::size_t p = 0; p < n_pairs; ++p) {
    const auto& pr = terms.pairs[p];
    const double f = terms.fc[p];
    const double df = terms.dfc[p];
    for (std::size_t k = 0; k < K; ++k) {
      const double w = spec.widths[k];
      const double d = pr.r - spec.centers[k];
      const double gauss = std::exp(-w * d * d);
      const double dg_dc = 2.0 * w * d * gauss;
      const double dg_dw = -d * d * gauss;
      const double dgp_dc = 2.0 * w * gauss - 4.0 * w * w * d * d * gauss;
      const double dgp_dw = -2.0 * d * gauss + 2.0 * w * d * d * d * gauss;
      const double dphi_dc = dg_dc * f;
      const double dphi_dw = dg_dw * f;
      const double ddphi_dc = dgp_dc * f + dg_dc * df;
      const double ddphi_dw = dgp_dw * f + dg_dw * df;
      const double gb = G_bar[pr.i * K + k];
      const double ub = U_bar[pr.i * K + k] * proj[p];
      g_center[k] += gb * dphi_dc + ub * ddphi_dc;
      g_width[k] += gb * dphi_dw + ub * ddphi_dw;
    }
  }
}

NeuralPotential fit_rescale(const NeuralPotential& m, const Dataset& d) {
  if (d.size() < 2) throw InvalidArgument("fit_rescale needs at least 2 frames");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& c : d) {
    if (!c.energy) throw InvalidArgument("fit_rescale needs energy labels");
    sum += *c.energy / static_cast<double>(c.size());
    ++count;
  }
  if (!d.sigma_dft_force()) throw InvalidArgument("fit_rescale needs force labels");
  Rescale r;
  r.enabled = true;
  r.shift = sum / static_cast<double>(count);
  r.scale = *d.sigma_dft_force();
  if (!(r.scale > 0.0)) r.scale = 1.0;
  NeuralPotential out = m;
  out.set_rescale(r);
  return out;
}

}  // namespace nnipls
