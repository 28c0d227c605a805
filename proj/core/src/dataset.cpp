#include "nnipls/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "nnipls/errors.hpp"
#include "nnipls/random.hpp"

namespace nnipls {

double Cell::determinant() const {
  const auto& a = vectors[0];
  const auto& b = vectors[1];
  const auto& c = vectors[2];
  return a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) +
         a[2] * (b[0] * c[1] - b[1] * c[0]);
}

void Configuration::validate() const {
  if (species.size() != positions.size())
    throw InvalidArgument("species count " + std::to_string(species.size()) +
                          " does not match position count " + std::to_string(positions.size()));
  if (forces && forces->size() != positions.size())
    throw InvalidArgument("force count " + std::to_string(forces->size()) +
                          " does not match position count " + std::to_string(positions.size()));
  if (cell && cell->any_periodic() && std::abs(cell->determinant()) < 1e-12)
    throw InvalidArgument("periodic cell is singular");
  if (energy && !std::isfinite(*energy)) throw InvalidArgument("energy is not finite");
  for (const auto& p : positions)
    for (double x : p)
      if (!std::isfinite(x)) throw InvalidArgument("position is not finite");
  if (forces)
    for (const auto& f : *forces)
      for (double x : f)
        if (!std::isfinite(x)) throw InvalidArgument("force component is not finite");
}

namespace {

// Population mean/std accumulated in two passes for stability.
struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  m.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m.mean) * (x - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(v.size()));
  return m;
}

std::vector<double> per_atom_energies(const std::vector<Configuration>& cs) {
  std::vector<double> out;
  for (const auto& c : cs)
    if (c.energy && c.size() > 0) out.push_back(*c.energy / static_cast<double>(c.size()));
  return out;
}

std::vector<double> force_components(const std::vector<Configuration>& cs) {
  std::vector<double> out;
  for (const auto& c : cs)
    if (c.forces)
      for (const auto& f : *c.forces) out.insert(out.end(), f.begin(), f.end());
  return out;
}

}  // namespace

Dataset::Dataset(std::string name, std::vector<Configuration> configurations)
    : name_(std::move(name)), configurations_(std::move(configurations)) {
  if (configurations_.empty()) throw InvalidArgument("dataset '" + name_ + "' is empty");
  for (std::size_t i = 0; i < configurations_.size(); ++i) {
    try {
      configurations_[i].validate();
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("configuration " + std::to_string(i) + ": " + e.what());
    }
  }
  const auto energies = per_atom_energies(configurations_);
  if (!energies.empty()) sigma_energy_ = moments(energies).std * units::kMilli;
  const auto comps = force_components(configurations_);
  if (!comps.empty()) sigma_force_ = moments(comps).std;
}

std::size_t Dataset::total_atoms() const {
  std::size_t n = 0;
  for (const auto& c : configurations_) n += c.size();
  return n;
}

NoiseTarget parse_noise_target(const std::string& text) {
  if (text == "energies" || text == "energy") return NoiseTarget::kEnergies;
  if (text == "forces" || text == "force") return NoiseTarget::kForces;
  if (text == "both") return NoiseTarget::kBoth;
  throw ConfigError("unknown noise target '" + text + "' (expected energies|forces|both)");
}

Dataset corrupt_labels(const Dataset& d, const NoiseSpec& spec) {
  if (!(spec.sigma >= 0.0)) throw InvalidArgument("noise sigma must be >= 0");
  const bool do_energy = spec.target != NoiseTarget::kForces;
  const bool do_forces = spec.target != NoiseTarget::kEnergies;

  double energy_scale = 0.0;  // eV/atom
  double force_scale = 0.0;   // eV/A
  if (do_energy) {
    if (!d.sigma_dft_energy()) throw InvalidArgument("energy noise requested but dataset has no energies");
    energy_scale = spec.sigma * *d.sigma_dft_energy() / units::kMilli;
  }
  if (do_forces) {
    if (!d.sigma_dft_force()) throw InvalidArgument("force noise requested but dataset has no forces");
    force_scale = spec.sigma * *d.sigma_dft_force();
  }

  // Separate streams so the force noise does not depend on whether energies
  // are corrupted too.
  Rng energy_rng = make_rng(spec.seed, "noise.energy");
  Rng force_rng = make_rng(spec.seed, "noise.forces");
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<Configuration> out = d.configurations();
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& c = out[i];
    if (do_energy) {
      if (!c.energy) throw InvalidArgument("configuration " + std::to_string(i) + " has no energy");
      const double g = normal(energy_rng);
      if (spec.sigma > 0.0) *c.energy += g * energy_scale * static_cast<double>(c.size());
    }
    if (do_forces) {
      if (!c.forces) throw InvalidArgument("configuration " + std::to_string(i) + " has no forces");
      for (auto& f : *c.forces)
        for (double& x : f) {
          const double g = normal(force_rng);
          if (spec.sigma > 0.0) x += g * force_scale;
        }
    }
  }
  return Dataset(d.name(), std::move(out));
}

DatasetStats dataset_stats(const Dataset& d) {
  DatasetStats s;
  s.n_configurations = d.size();
  s.n_atoms = d.total_atoms();
  const auto energies = per_atom_energies(d.configurations());
  const auto comps = force_components(d.configurations());
  if (energies.empty() && comps.empty()) throw InvalidArgument("dataset '" + d.name() + "' has no labels");
  const auto em = moments(energies);
  s.energy_mean_mev_per_atom = em.mean * units::kMilli;
  s.energy_std_mev_per_atom = em.std * units::kMilli;
  const auto fm = moments(comps);
  s.force_mean = fm.mean;
  s.force_std = fm.std;
  s.n_force_components = comps.size();
  for (const auto& c : d) {
    if (c.temperature_tag)
      ++s.counts_per_temperature[*c.temperature_tag];
    else
      ++s.untagged;
  }
  return s;
}

TemperatureSplit split_by_temperature(const Dataset& d, double train_temperature, double holdout_fraction,
                                      std::uint64_t seed) {
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0))
    throw InvalidArgument("holdout fraction must lie in [0, 1)");
  constexpr double kTagTolerance = 1e-9;
  std::vector<std::size_t> train_idx;
  std::map<double, std::vector<Configuration>> others;
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& c = d[i];
    if (!c.temperature_tag)
      throw InvalidArgument("configuration " + std::to_string(i) + " has no temperature tag");
    if (std::abs(*c.temperature_tag - train_temperature) <= kTagTolerance)
      train_idx.push_back(i);
    else
      others[*c.temperature_tag].push_back(c);
  }
  if (train_idx.empty())
    throw InvalidArgument("training temperature " + std::to_string(train_temperature) + " K not present");

  Rng rng = make_rng(seed, "split");
  std::shuffle(train_idx.begin(), train_idx.end(), rng);
  const auto n_holdout =
      static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(train_idx.size())));
  if (n_holdout >= train_idx.size()) throw InvalidArgument("holdout leaves no training frames");

  // Keep the original frame order inside each part.
  std::vector<std::size_t> held(train_idx.begin(), train_idx.begin() + static_cast<std::ptrdiff_t>(n_holdout));
  std::vector<std::size_t> kept(train_idx.begin() + static_cast<std::ptrdiff_t>(n_holdout), train_idx.end());
  std::sort(held.begin(), held.end());
  std::sort(kept.begin(), kept.end());

  std::vector<Configuration> train;
  for (auto i : kept) train.push_back(d[i]);
  std::map<double, Dataset> tests;
  if (!held.empty()) {
    std::vector<Configuration> h;
    for (auto i : held) h.push_back(d[i]);
    tests.emplace(train_temperature, Dataset(d.name() + "@heldout", std::move(h)));
  }
  for (auto& [t, cs] : others) tests.emplace(t, Dataset(d.name() + "@" + std::to_string(t), std::move(cs)));
  return TemperatureSplit{Dataset(d.name() + "@train", std::move(train)), std::move(tests)};
}

double atomic_mass(const std::string& symbol) {
  static const std::unordered_map<std::string, double> kMasses = {
      {"H", 1.008},    {"He", 4.0026},  {"Li", 6.94},    {"Be", 9.0122},  {"B", 10.81},
      {"C", 12.011},   {"N", 14.007},   {"O", 15.999},   {"F", 18.998},   {"Ne", 20.180},
      {"Na", 22.990},  {"Mg", 24.305},  {"Al", 26.982},  {"Si", 28.085},  {"P", 30.974},
      {"S", 32.06},    {"Cl", 35.45},   {"Ar", 39.948},  {"K", 39.098},   {"Ca", 40.078},
      {"Ti", 47.867},  {"Fe", 55.845},  {"Ni", 58.693},  {"Cu", 63.546},  {"Zn", 65.38},
      {"Kr", 83.798},  {"Ag", 107.87},  {"Xe", 131.29},  {"Pt", 195.08},  {"Au", 196.97},
  };
  auto it = kMasses.find(symbol);
  if (it == kMasses.end()) throw InvalidArgument("unknown element symbol '" + symbol + "'");
  return it->second;
}

}  // namespace nnipls
