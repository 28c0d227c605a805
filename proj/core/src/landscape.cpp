#include "nnipls/landscape.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nnipls/errors.hpp"
#include "nnipls/extxyz.hpp"
#include "nnipls/loss.hpp"
#include "nnipls/parallel.hpp"
#include "nnipls/random.hpp"

namespace nnipls {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<char> frozen_mask(const FilterPartition& partition, std::size_t n) {
  std::vector<char> mask(n, 0);
  for (const auto& b : partition.blocks)
    if (b.frozen) std::fill_n(mask.begin() + static_cast<std::ptrdiff_t>(b.offset), b.length, 1);
  return mask;
}

double block_norm(std::span<const double> v, const FilterBlock& b) {
  double s = 0.0;
  for (std::size_t i = b.offset; i < b.offset + b.length; ++i) s += v[i] * v[i];
  return std::sqrt(s);
}

double global_dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

ParameterVector with_frozen(std::span<const double> theta, const FilterPartition& partition,
                            const std::vector<std::size_t>& frozen_layers) {
  ParameterVector p;
  p.values.assign(theta.begin(), theta.end());
  p.partition = partition.with_frozen_layers(frozen_layers);
  p.partition.validate(p.values.size());
  return p;
}

// Evaluates one grid point; numeric failures become +inf.
LossPoint guarded(const LossFunction& loss, std::span<const double> params, std::atomic<std::size_t>& counter) {
  ++counter;
  try {
    auto v = loss(params);
    if (!std::isfinite(v.energy)) v.energy = kInf;
    if (!std::isfinite(v.force)) v.force = kInf;
    return v;
  } catch (const NumericError&) {
    return {kInf, kInf};
  }
}

void check_grid(const std::vector<double>& grid, const char* name) {
  if (grid.empty()) throw InvalidArgument(std::string(name) + " is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument(std::string(name) + " must be strictly increasing");
  if (std::find(grid.begin(), grid.end(), 0.0) == grid.end())
    throw InvalidArgument(std::string(name) + " must contain t = 0");
}

}  // namespace

Direction sample_direction(const ParameterVector& p, std::uint64_t seed) {
  p.partition.validate(p.values.size());
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Direction d;
  d.values.resize(p.values.size());
  for (double& x : d.values) x = normal(rng);
  const auto mask = frozen_mask(p.partition, p.values.size());
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) d.values[i] = 0.0;
  return d;
}

Direction filter_normalize(const Direction& d, const ParameterVector& p) {
  if (d.values.size() != p.values.size()) throw InvalidArgument("direction and parameter lengths differ");
  p.partition.validate(p.values.size());
  Direction out;
  out.values.assign(d.values.size(), 0.0);
  out.normalized = true;
  for (std::size_t k = 0; k < p.partition.blocks.size(); ++k) {
    const auto& b = p.partition.blocks[k];
    if (b.frozen) continue;
    const double theta_norm = block_norm(p.values, b);
    if (theta_norm == 0.0) continue;
    const double delta_norm = block_norm(d.values, b);
    if (delta_norm == 0.0)
      throw DegenerateDirection("direction block " + std::to_string(k) + " has zero norm; resample");
    const double s = theta_norm / delta_norm;
    for (std::size_t i = b.offset; i < b.offset + b.length; ++i) out.values[i] = d.values[i] * s;
  }
  return out;
}

std::pair<Direction, Direction> orthogonalize_pair(const Direction& d1, const Direction& d2, const ParameterVector& p) {
  if (d1.values.size() != d2.values.size()) throw InvalidArgument("direction lengths differ");
  if (d1.normalized || d2.normalized) throw InvalidArgument("orthogonalize_pair expects raw directions");
  const double n11 = global_dot(d1.values, d1.values);
  if (n11 == 0.0) throw DegenerateDirection("first direction is zero");
  const double c = global_dot(d1.values, d2.values) / n11;
  Direction r2;
  r2.values.resize(d2.values.size());
  for (std::size_t i = 0; i < r2.values.size(); ++i) r2.values[i] = d2.values[i] - c * d1.values[i];
  const double n22 = std::sqrt(global_dot(d2.values, d2.values));
  if (std::sqrt(global_dot(r2.values, r2.values)) <= 1e-10 * n22 || n22 == 0.0)
    throw DegenerateDirection("directions are parallel");
  return {filter_normalize(d1, p), filter_normalize(r2, p)};
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n == 0) throw InvalidArgument("grid needs at least one point");
  if (n == 1) return {lo};
  if (!(hi > lo)) throw InvalidArgument("grid upper bound must exceed lower bound");
  std::vector<double> g(n);
  const double m = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double k = static_cast<double>(i);
    g[i] = (lo * (m - k) + hi * k) / m;
  }
  if (lo == -hi) {
    for (std::size_t i = 0; i < n / 2; ++i) g[n - 1 - i] = -g[i];
    if (n % 2 == 1) g[n / 2] = 0.0;
  }
  return g;
}

std::uint64_t direction_seed(std::uint64_t seed, std::size_t n) { return substream_seed(seed, "landscape.direction", n); }

void LandscapeProfile::recompute_means() {
  const std::size_t T = t_grid.size();
  mean_energy.assign(T, 0.0);
  mean_force.assign(T, 0.0);
  if (energy.empty()) return;
  const double inv = 1.0 / static_cast<double>(energy.size());
  for (std::size_t t = 0; t < T; ++t) {
    double se = 0.0;
    double sf = 0.0;
    for (std::size_t n = 0; n < energy.size(); ++n) {
      se += energy[n][t];
      sf += force[n][t];
    }
    mean_energy[t] = se * inv;
    mean_force[t] = sf * inv;
  }
}

LandscapeProfile scan_1d(std::span<const double> theta, const FilterPartition& partition, const LossFunction& loss,
                         std::size_t n_directions, const std::vector<double>& t_grid, std::uint64_t seed,
                         const LandscapeOptions& options) {
  if (n_directions == 0) throw InvalidArgument("need at least one direction");
  check_grid(t_grid, "t_grid");
  const auto p = with_frozen(theta, partition, options.frozen_layers);

  std::vector<Direction> dirs;
  dirs.reserve(n_directions);
  for (std::size_t n = 0; n < n_directions; ++n)
    dirs.push_back(filter_normalize(sample_direction(p, direction_seed(seed, n)), p));

  const std::size_t T = t_grid.size();
  const std::size_t zero = static_cast<std::size_t>(std::find(t_grid.begin(), t_grid.end(), 0.0) - t_grid.begin());
  LandscapeProfile prof;
  prof.t_grid = t_grid;
  prof.energy.assign(n_directions, std::vector<double>(T, 0.0));
  prof.force.assign(n_directions, std::vector<double>(T, 0.0));

  std::atomic<std::size_t> counter{0};
  LossPoint origin{};
  if (options.cache_origin) origin = guarded(loss, p.values, counter);

  std::vector<std::pair<std::size_t, std::size_t>> tasks;
  for (std::size_t n = 0; n < n_directions; ++n)
    for (std::size_t t = 0; t < T; ++t)
      if (!(options.cache_origin && t == zero)) tasks.emplace_back(n, t);

  parallel_for(tasks.size(), options.threads, [&](std::size_t k) {
    const auto [n, t] = tasks[k];
    std::vector<double> q(p.values.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = p.values[i] + t_grid[t] * dirs[n].values[i];
    const auto v = guarded(loss, q, counter);
    prof.energy[n][t] = v.energy;
    prof.force[n][t] = v.force;
  });
  if (options.cache_origin)
    for (std::size_t n = 0; n < n_directions; ++n) {
      prof.energy[n][zero] = origin.energy;
      prof.force[n][zero] = origin.force;
    }

  prof.recompute_means();
  prof.meta.seed = seed;
  prof.meta.n_directions = n_directions;
  prof.meta.frozen_blocks = p.partition.frozen_block_indices();
  prof.meta.evaluations = counter.load();
  for (std::size_t n = 0; n < n_directions; ++n)
    for (std::size_t t = 0; t < T; ++t)
      if (std::isinf(prof.energy[n][t]) || std::isinf(prof.force[n][t])) ++prof.meta.failed_points;
  return prof;
}

Surface2D scan_2d(std::span<const double> theta, const FilterPartition& partition, const LossFunction& loss,
                  const std::vector<double>& t1_grid, const std::vector<double>& t2_grid, std::uint64_t seed,
                  const LandscapeOptions& options) {
  check_grid(t1_grid, "t1_grid");
  check_grid(t2_grid, "t2_grid");
  const auto p = with_frozen(theta, partition, options.frozen_layers);
  const auto [d1, d2] = orthogonalize_pair(sample_direction(p, direction_seed(seed, 0)),
                                           sample_direction(p, direction_seed(seed, 1)), p);
  Surface2D s;
  s.t1_grid = t1_grid;
  s.t2_grid = t2_grid;
  const std::size_t n1 = t1_grid.size();
  const std::size_t n2 = t2_grid.size();
  s.energy.assign(n1 * n2, 0.0);
  s.force.assign(n1 * n2, 0.0);
  std::atomic<std::size_t> counter{0};
  parallel_for(n1 * n2, options.threads, [&](std::size_t k) {
    const double a = t1_grid[k / n2];
    const double b = t2_grid[k % n2];
    std::vector<double> q(p.values.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = p.values[i] + a * d1.values[i] + b * d2.values[i];
    const auto v = guarded(loss, q, counter);
    s.energy[k] = v.energy;
    s.force[k] = v.force;
  });
  s.meta.seed = seed;
  s.meta.n_directions = 2;
  s.meta.frozen_blocks = p.partition.frozen_block_indices();
  s.meta.evaluations = counter.load();
  for (std::size_t k = 0; k < n1 * n2; ++k)
    if (std::isinf(s.energy[k]) || std::isinf(s.force[k])) ++s.meta.failed_points;
  return s;
}

LossFunction model_loss_function(const NeuralPotential& m, const Dataset& d) {
  return [&m, &d](std::span<const double> params) {
    const auto moved = m.with_parameter_values(params);
    const auto lv = loss_eval(moved, d);
    return LossPoint{lv.loss_energy, lv.loss_force};
  };
}

LandscapeProfile landscape_1d(const NeuralPotential& m, const Dataset& d, std::size_t n_directions,
                              const std::vector<double>& t_grid, std::uint64_t seed, const LandscapeOptions& options) {
  auto prof = scan_1d(m.parameters().values, m.parameters().partition, model_loss_function(m, d), n_directions, t_grid,
                      seed, options);
  prof.meta.dataset_id = d.name();
  return prof;
}

Surface2D landscape_2d(const NeuralPotential& m, const Dataset& d, const std::vector<double>& t1_grid,
                       const std::vector<double>& t2_grid, std::uint64_t seed, const LandscapeOptions& options) {
  auto s = scan_2d(m.parameters().values, m.parameters().partition, model_loss_function(m, d), t1_grid, t2_grid, seed,
                   options);
  s.meta.dataset_id = d.name();
  return s;
}

LandscapeProfile interpolate_models(const NeuralPotential& a, const NeuralPotential& b, const Dataset& d,
                                    const std::vector<double>& t_grid, unsigned threads) {
  const auto& pa = a.parameters();
  const auto& pb = b.parameters();
  bool same = pa.values.size() == pb.values.size() && a.hidden_widths() == b.hidden_widths() &&
              a.descriptor().trainable_basis == b.descriptor().trainable_basis &&
              pa.partition.blocks.size() == pb.partition.blocks.size();
  if (same && !a.descriptor().trainable_basis)
    same = a.descriptor().centers == b.descriptor().centers && a.descriptor().widths == b.descriptor().widths &&
           a.descriptor().cutoff == b.descriptor().cutoff;
  if (!same) throw InvalidArgument("interpolate_models: architectures differ");
  if (t_grid.empty()) throw InvalidArgument("t_grid is empty");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw InvalidArgument("t_grid must be strictly increasing");

  LandscapeProfile prof;
  prof.t_grid = t_grid;
  prof.energy.assign(1, std::vector<double>(t_grid.size()));
  prof.force.assign(1, std::vector<double>(t_grid.size()));
  std::atomic<std::size_t> counter{0};
  parallel_for(t_grid.size(), threads, [&](std::size_t k) {
    const double t = t_grid[k];
    std::vector<double> q(pa.values.size());
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = (1.0 - t) * pa.values[i] + t * pb.values[i];
    NeuralPotential m = a.with_parameter_values(q);
    Rescale r;
    r.enabled = true;
    r.scale = (1.0 - t) * a.rescale().effective_scale() + t * b.rescale().effective_scale();
    r.shift = (1.0 - t) * a.rescale().effective_shift() + t * b.rescale().effective_shift();
    m.set_rescale(r);
    const LossFunction f = [&m, &d](std::span<const double>) {
      const auto lv = loss_eval(m, d);
      return LossPoint{lv.loss_energy, lv.loss_force};
    };
    const auto v = guarded(f, q, counter);
    prof.energy[0][k] = v.energy;
    prof.force[0][k] = v.force;
  });
  prof.recompute_means();
  prof.meta.kind = "interpolation";
  prof.meta.dataset_id = d.name();
  prof.meta.n_directions = 1;
  prof.meta.evaluations = counter.load();
  for (std::size_t k = 0; k < t_grid.size(); ++k)
    if (std::isinf(prof.energy[0][k]) || std::isinf(prof.force[0][k])) ++prof.meta.failed_points;
  return prof;
}

std::vector<double> reweight_surface(const Surface2D& s, double w_energy, double w_force) {
  if (w_energy < 0.0 || w_force < 0.0) throw InvalidArgument("re-weighting weights must be >= 0");
  std::vector<double> out(s.energy.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = w_energy * s.energy[k] + w_force * s.force[k];
  return out;
}

std::string profile_csv(const LandscapeProfile& p) {
  std::ostringstream out;
  out << "direction,t,loss_energy_mev_per_atom,loss_force_mev_per_ang\n";
  for (std::size_t n = 0; n < p.n_directions(); ++n)
    for (std::size_t t = 0; t < p.t_grid.size(); ++t)
      out << n << ',' << format_double(p.t_grid[t]) << ',' << format_double(p.energy[n][t]) << ','
          << format_double(p.force[n][t]) << '\n';
  return out.str();
}

LandscapeProfile profile_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("direction,t,", 0) != 0) throw IoError("profile CSV: missing header");
  std::map<std::size_t, std::vector<std::pair<double, std::pair<double, double>>>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f[4];
    for (auto& x : f)
      if (!std::getline(ls, x, ',')) throw IoError("profile CSV line " + std::to_string(line_no) + ": too few fields");
    try {
      rows[std::stoul(f[0])].push_back({std::stod(f[1]), {std::stod(f[2]), std::stod(f[3])}});
    } catch (const std::exception&) {
      throw IoError("profile CSV line " + std::to_string(line_no) + ": non-numeric field");
    }
  }
  if (rows.empty()) throw IoError("profile CSV has no rows");
  LandscapeProfile p;
  for (const auto& [n, r] : rows) {
    std::vector<double> grid, e, fo;
    for (const auto& [t, v] : r) {
      grid.push_back(t);
      e.push_back(v.first);
      fo.push_back(v.second);
    }
    if (p.t_grid.empty())
      p.t_grid = grid;
    else if (grid != p.t_grid)
      throw IoError("profile CSV: directions use different t grids");
    p.energy.push_back(std::move(e));
    p.force.push_back(std::move(fo));
  }
  for (std::size_t i = 1; i < p.t_grid.size(); ++i)
    if (!(p.t_grid[i] > p.t_grid[i - 1])) throw IoError("profile CSV: t grid not strictly increasing");
  p.meta.n_directions = p.energy.size();
  p.recompute_means();
  return p;
}

namespace {

nlohmann::json metadata_json(const LandscapeMetadata& m) {
  return {{"kind", m.kind},
          {"model_id", m.model_id},
          {"dataset_id", m.dataset_id},
          {"seed", m.seed},
          {"n_directions", m.n_directions},
          {"frozen_blocks", m.frozen_blocks},
          {"evaluations", m.evaluations},
          {"failed_points", m.failed_points},
          {"orthogonalization", "gram-schmidt on raw directions before filter normalization"},
          {"loss", "rmse"}};
}

nlohmann::json grid_json(const std::vector<double>& g) {
  return {{"points", g.size()}, {"min", g.front()}, {"max", g.back()}, {"values", g}};
}

}  // namespace

std::string profile_metadata_json(const LandscapeProfile& p) {
  auto j = metadata_json(p.meta);
  j["t_grid"] = grid_json(p.t_grid);
  return j.dump(2);
}

std::string surface_csv(const Surface2D& s) {
  std::ostringstream out;
  out << "t1,t2,loss_energy,loss_force\n";
  for (std::size_t i = 0; i < s.t1_grid.size(); ++i)
    for (std::size_t j = 0; j < s.t2_grid.size(); ++j)
      out << format_double(s.t1_grid[i]) << ',' << format_double(s.t2_grid[j]) << ',' << format_double(s.energy_at(i, j))
          << ',' << format_double(s.force_at(i, j)) << '\n';
  return out.str();
}

std::string surface_metadata_json(const Surface2D& s) {
  auto j = metadata_json(s.meta);
  j["t1_grid"] = grid_json(s.t1_grid);
  j["t2_grid"] = grid_json(s.t2_grid);
  j["direction_ids"] = {s.direction_ids.first, s.direction_ids.second};
  return j.dump(2);
}

}  // namespace nnipls
