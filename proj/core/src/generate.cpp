#include "nnipls/generate.hpp"

#include <algorithm>
#include <cmath>

#include "nnipls/errors.hpp"
#include "nnipls/md.hpp"
#include "nnipls/random.hpp"

namespace nnipls {

namespace {

double max_component(const std::vector<Vec3>& f) {
  double m = 0.0;
  for (const auto& v : f)
    for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Configuration relax(const ForceModel& model, const Configuration& start, const RelaxOptions& options) {
  constexpr double kAlpha0 = 0.1;
  constexpr double kFInc = 1.1;
  constexpr double kFDec = 0.5;
  constexpr double kFAlpha = 0.99;
  constexpr std::size_t kNMin = 5;

  Configuration c = start;
  c.energy.reset();
  c.forces.reset();
  const std::size_t n = c.size();
  std::vector<Vec3> v(n, Vec3{0.0, 0.0, 0.0});
  double dt = 0.1 * options.max_step;
  const double dt_max = options.max_step;
  double alpha = kAlpha0;
  std::size_t positive = 0;
  auto ev = model.evaluate(c);
  for (std::size_t step = 0; step < options.max_steps; ++step) {
    if (max_component(ev.forces) < options.force_tolerance) break;
    double p = 0.0, vn = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p += dot(ev.forces[i], v[i]);
      vn += dot(v[i], v[i]);
      fn += dot(ev.forces[i], ev.forces[i]);
    }
    vn = std::sqrt(vn);
    fn = std::sqrt(fn);
    if (p > 0.0) {
      for (std::size_t i = 0; i < n; ++i) v[i] = (1.0 - alpha) * v[i] + (alpha * vn / fn) * ev.forces[i];
      if (++positive > kNMin) {
        dt = std::min(dt * kFInc, dt_max);
        alpha *= kFAlpha;
      }
    } else {
      positive = 0;
      dt *= kFDec;
      alpha = kAlpha0;
      for (auto& vi : v) vi = Vec3{0.0, 0.0, 0.0};
    }
    for (std::size_t i = 0; i < n; ++i) v[i] += dt * ev.forces[i];
    double longest = 0.0;
    for (const auto& vi : v) longest = std::max(longest, dt * norm(vi));
    const double shrink = longest > options.max_step ? options.max_step / longest : 1.0;
    for (std::size_t i = 0; i < n; ++i) c.positions[i] += (shrink * dt) * v[i];
    ev = model.evaluate(c);
    if (!std::isfinite(ev.energy)) throw NumericError("relaxation diverged");
  }
  c.energy = ev.energy;
  c.forces = ev.forces;
  return c;
}

Configuration compact_cluster(std::size_t n_atoms, double spacing, const std::string& species) {
  if (n_atoms < 2) throw InvalidArgument("cluster needs at least two atoms");
  if (!(spacing > 0.0)) throw InvalidArgument("cluster spacing must be positive");
  std::vector<std::array<int, 3>> sites;
  const int r = static_cast<int>(std::ceil(std::cbrt(static_cast<double>(n_atoms)))) + 1;
  for (int x = -r; x <= r; ++x)
    for (int y = -r; y <= r; ++y)
      for (int z = -r; z <= r; ++z) sites.push_back({x, y, z});
  std::stable_sort(sites.begin(), sites.end(), [](const auto& a, const auto& b) {
    const int na = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
    const int nb = b[0] * b[0] + b[1] * b[1] + b[2] * b[2];
    return na < nb;
  });
  Configuration c;
  for (std::size_t i = 0; i < n_atoms; ++i) {
    const auto& s = sites[i];
    c.positions.push_back({spacing * s[0], spacing * s[1], spacing * s[2]});
    c.species.push_back(species);
  }
  return c;
}

Dataset generate_reference_dataset(const ForceModel& reference, std::size_t n_atoms,
                                   const std::vector<double>& temperatures, std::size_t frames_per_temperature,
                                   std::uint64_t seed, const GenerateOptions& options, const std::string& name) {
  if (temperatures.empty()) throw InvalidArgument("no sampling temperatures");
  if (frames_per_temperature == 0) throw InvalidArgument("frames_per_temperature must be positive");
  if (options.stride == 0) throw InvalidArgument("stride must be positive");
  atomic_mass(options.species);
  const Configuration ground = relax(reference, compact_cluster(n_atoms, options.spacing, options.species));

  std::vector<Configuration> frames;
  frames.reserve(temperatures.size() * frames_per_temperature);
  for (std::size_t k = 0; k < temperatures.size(); ++k) {
    const double temperature = temperatures[k];
    MDConfig cfg;
    cfg.temperature = temperature;
    cfg.timestep = options.timestep;
    cfg.tau = options.tau;
    MDState s = make_state(reference, ground, init_velocities(ground, temperature, substream_seed(seed, "generate.velocities", k)));
    for (std::size_t i = 0; i < options.equilibration; ++i) md_step(s, reference, cfg);
    for (std::size_t f = 0; f < frames_per_temperature; ++f) {
      for (std::size_t i = 0; i < options.stride; ++i) md_step(s, reference, cfg);
      Configuration c = s.config;
      c.energy = s.potential_energy;
      c.forces = s.forces;
      c.temperature_tag = temperature;
      frames.push_back(std::move(c));
    }
  }
  return Dataset(name, std::move(frames));
}

}  // namespace nnipls
