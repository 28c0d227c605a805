#include "nnipls/md.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nnipls/errors.hpp"
#include "nnipls/extxyz.hpp"
#include "nnipls/parallel.hpp"
#include "nnipls/random.hpp"

namespace nnipls {

std::size_t MDConfig::n_steps() const {
  return static_cast<std::size_t>(std::llround(total_time * units::kMilli / timestep));
}

void MDConfig::validate(std::size_t n_atoms) const {
  if (!(temperature > 0.0)) throw ConfigError("md temperature must be positive");
  if (!(timestep > 0.0) || !std::isfinite(timestep)) throw ConfigError("md timestep must be positive");
  if (!(tau > 0.0)) throw ConfigError("md tau must be positive");
  if (!(total_time > 0.0) || !std::isfinite(total_time)) throw ConfigError("md total_time must be positive");
  if (n_trajectories == 0) throw ConfigError("md n_trajectories must be positive");
  if (!(failure_bond_length > 0.0)) throw ConfigError("md failure_bond_length must be positive");
  if (trace_interval == 0) throw ConfigError("md trace_interval must be positive");
  for (const auto& [i, j] : bond_list)
    if (i >= n_atoms || j >= n_atoms || i == j) throw ConfigError("md bond_list holds an invalid pair");
}

double kinetic_energy(const MDState& s) {
  double k = 0.0;
  for (std::size_t i = 0; i < s.velocities.size(); ++i) k += s.masses[i] * dot(s.velocities[i], s.velocities[i]);
  return 0.5 * k * units::kAmuA2PerFs2InEv;
}

double instantaneous_temperature(const MDState& s) {
  const double dof = 3.0 * static_cast<double>(s.velocities.size()) - 3.0;
  return 2.0 * kinetic_energy(s) / (dof * units::kBoltzmann);
}

namespace {

std::vector<double> masses_of(const Configuration& c) {
  std::vector<double> m(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) m[i] = atomic_mass(c.species[i]);
  return m;
}

void remove_drift(std::vector<Vec3>& v, const std::vector<double>& m) {
  Vec3 p{0.0, 0.0, 0.0};
  double mass = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    p += m[i] * v[i];
    mass += m[i];
  }
  const Vec3 vcm = (1.0 / mass) * p;
  for (auto& vi : v) vi -= vcm;
}

}  // namespace

std::vector<Vec3> init_velocities(const Configuration& c, double temperature, std::uint64_t seed) {
  if (c.size() < 2) throw InvalidArgument("velocity initialization needs at least two atoms");
  if (!(temperature > 0.0)) throw InvalidArgument("velocity initialization needs T > 0");
  const auto m = masses_of(c);
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vec3> v(c.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = std::sqrt(units::kBoltzmann * temperature / (m[i] * units::kAmuA2PerFs2InEv));
    for (double& x : v[i]) x = s * normal(rng);
  }
  remove_drift(v, m);
  MDState probe;
  probe.velocities = v;
  probe.masses = m;
  const double t_now = instantaneous_temperature(probe);
  if (!(t_now > 0.0)) throw NumericError("velocity draw has zero kinetic energy");
  const double f = std::sqrt(temperature / t_now);
  for (auto& vi : v) vi = f * vi;
  return v;
}

MDState make_state(const ForceModel& model, const Configuration& c, std::vector<Vec3> velocities) {
  if (velocities.size() != c.size()) throw InvalidArgument("velocity count differs from atom count");
  MDState s;
  s.config = c;
  s.config.energy.reset();
  s.config.forces.reset();
  s.velocities = std::move(velocities);
  s.masses = masses_of(c);
  const auto ev = model.evaluate(s.config);
  s.potential_energy = ev.energy;
  s.forces = ev.forces;
  return s;
}

double berendsen_lambda(double dt, double tau, double target, double current) {
  if (!std::isfinite(tau)) return 1.0;
  if (!(current > 0.0)) return 1.1;
  const double arg = 1.0 + (dt / tau) * (target / current - 1.0);
  if (!(arg > 0.0)) return 0.9;
  return std::clamp(std::sqrt(arg), 0.9, 1.1);
}

void md_step(MDState& s, const ForceModel& model, const MDConfig& cfg) {
  const double dt = cfg.timestep;
  const std::size_t n = s.config.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 0.5 * dt / (s.masses[i] * units::kAmuA2PerFs2InEv);
    s.velocities[i] += a * s.forces[i];
    s.config.positions[i] += dt * s.velocities[i];
  }
  const auto ev = model.evaluate(s.config);
  for (const auto& f : ev.forces)
    if (!std::isfinite(f[0]) || !std::isfinite(f[1]) || !std::isfinite(f[2]))
      throw NumericError("non-finite forces at t = " + format_double(s.time + dt) + " fs");
  if (!std::isfinite(ev.energy)) throw NumericError("non-finite energy at t = " + format_double(s.time + dt) + " fs");
  s.forces = ev.forces;
  s.potential_energy = ev.energy;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 0.5 * dt / (s.masses[i] * units::kAmuA2PerFs2InEv);
    s.velocities[i] += a * s.forces[i];
  }
  if (cfg.thermostat_enabled()) {
    const double lambda = berendsen_lambda(dt, cfg.tau, cfg.temperature, instantaneous_temperature(s));
    for (auto& v : s.velocities) v = lambda * v;
  }
  s.time += dt;
}

std::optional<BondBreak> detect_failure(const Configuration& c, const std::vector<BondPair>& bonds, double threshold) {
  for (const auto& [i, j] : bonds) {
    const double d = norm(c.positions[j] - c.positions[i]);
    if (d > threshold) return BondBreak{{i, j}, d};
  }
  return std::nullopt;
}

std::optional<BondBreak> detect_failure(const Configuration& c, const MDConfig& cfg) {
  return detect_failure(c, cfg.bond_list, cfg.failure_bond_length);
}

std::vector<BondPair> infer_bond_list(const Configuration& c, double factor) {
  if (c.size() < 2) throw InvalidArgument("bond inference needs at least two atoms");
  double shortest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j) shortest = std::min(shortest, norm(c.positions[j] - c.positions[i]));
  std::vector<BondPair> bonds;
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = i + 1; j < c.size(); ++j)
      if (norm(c.positions[j] - c.positions[i]) <= factor * shortest) bonds.emplace_back(i, j);
  return bonds;
}

std::uint64_t trajectory_seed(std::uint64_t seed, std::size_t index) {
  return substream_seed(seed, "md.velocities", index);
}

TrajectoryRecord run_trajectory(const ForceModel& model, const Configuration& start, const MDConfig& cfg,
                                std::size_t index, const StepObserver& observer) {
  TrajectoryRecord rec;
  rec.index = index;
  rec.seed = trajectory_seed(cfg.seed, index);
  rec.time_to_failure = cfg.total_time;
  MDConfig local = cfg;
  if (local.bond_list.empty()) local.bond_list = infer_bond_list(start);
  const std::size_t steps = cfg.n_steps();
  std::size_t step = 0;
  try {
    MDState s = make_state(model, start, init_velocities(start, cfg.temperature, rec.seed));
    rec.temperature_trace.push_back(instantaneous_temperature(s));
    if (observer) observer(0, s);
    for (step = 1; step <= steps; ++step) {
      md_step(s, model, local);
      if (step % cfg.trace_interval == 0) rec.temperature_trace.push_back(instantaneous_temperature(s));
      if (cfg.dump_interval > 0 && step % cfg.dump_interval == 0) {
        Configuration f = s.config;
        f.energy = s.potential_energy;
        f.forces = s.forces;
        rec.frames.push_back(std::move(f));
      }
      if (observer) observer(step, s);
      if (auto b = detect_failure(s.config, local)) {
        rec.failed = true;
        rec.cause = "bond";
        rec.failure = b;
        rec.time_to_failure = static_cast<double>(step) * cfg.timestep / units::kMilli;
        return rec;
      }
    }
  } catch (const NumericError& e) {
    rec.failed = true;
    rec.cause = "numeric";
    rec.message = e.what();
    rec.time_to_failure = std::max<double>(static_cast<double>(step), 1.0) * cfg.timestep / units::kMilli;
  }
  return rec;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EnsembleSummary summarize(const std::vector<TrajectoryRecord>& records) {
  if (records.empty()) throw InvalidArgument("summary of an empty ensemble");
  EnsembleSummary s;
  s.n = records.size();
  std::vector<double> t;
  for (const auto& r : records) {
    t.push_back(r.time_to_failure);
    if (r.failed) ++s.n_failed;
  }
  double sum = 0.0;
  for (double x : t) sum += x;
  s.mean = sum / static_cast<double>(t.size());
  if (t.size() > 1) {
    double ss = 0.0;
    for (double x : t) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(t.size() - 1));
  }
  s.median = quantile(t, 0.5);
  s.q1 = quantile(t, 0.25);
  s.q3 = quantile(t, 0.75);
  return s;
}

EnsembleResult run_ensemble(const ForceModel& model, const Configuration& start, const MDConfig& cfg) {
  start.validate();
  cfg.validate(start.size());
  EnsembleResult out;
  out.config = cfg;
  if (out.config.bond_list.empty()) out.config.bond_list = infer_bond_list(start);
  out.records.resize(cfg.n_trajectories);
  parallel_for(cfg.n_trajectories, cfg.threads, [&](std::size_t k) {
    try {
      out.records[k] = run_trajectory(model, start, out.config, k);
    } catch (const std::exception& e) {
      TrajectoryRecord r;
      r.index = k;
      r.seed = trajectory_seed(cfg.seed, k);
      r.failed = true;
      r.cause = "error";
      r.message = e.what();
      r.time_to_failure = cfg.timestep / units::kMilli;
      out.records[k] = std::move(r);
    }
  });
  out.summary = summarize(out.records);
  return out;
}

namespace {

nlohmann::ordered_json summary_json(const EnsembleSummary& s) {
  nlohmann::ordered_json j{{"n", s.n},           {"n_failed", s.n_failed}, {"mean_ttf_ps", s.mean},
                           {"std_ttf_ps", nullptr}, {"median", s.median},   {"q1", s.q1},
                           {"q3", s.q3}};
  if (s.std) j["std_ttf_ps"] = *s.std;
  return j;
}

}  // namespace

std::string ensemble_json(const EnsembleResult& r, const std::string& model_id) {
  const auto& c = r.config;
  nlohmann::ordered_json cfg{{"temperature_k", c.temperature},
                             {"timestep_fs", c.timestep},
                             {"tau_fs", c.thermostat_enabled() ? nlohmann::ordered_json(c.tau) : nlohmann::ordered_json(nullptr)},
                             {"total_time_ps", c.total_time},
                             {"n_trajectories", c.n_trajectories},
                             {"failure_bond_length_ang", c.failure_bond_length},
                             {"bond_list", c.bond_list},
                             {"seed", c.seed},
                             {"trace_interval", c.trace_interval}};
  nlohmann::ordered_json recs = nlohmann::ordered_json::array();
  for (const auto& t : r.records) {
    nlohmann::ordered_json j{{"index", t.index},
                             {"seed", t.seed},
                             {"time_to_failure_ps", t.time_to_failure},
                             {"failed", t.failed},
                             {"cause", t.cause},
                             {"failure_pair", nullptr},
                             {"failure_distance_ang", nullptr},
                             {"message", t.message},
                             {"temperature_trace_k", t.temperature_trace}};
    if (t.failure) {
      j["failure_pair"] = {t.failure->pair.first, t.failure->pair.second};
      j["failure_distance_ang"] = t.failure->distance;
    }
    recs.push_back(std::move(j));
  }
  const nlohmann::ordered_json out{
      {"model", model_id}, {"config", cfg}, {"summary", summary_json(r.summary)}, {"records", recs}};
  return out.dump(2);
}

std::string summary_csv(const std::vector<std::pair<std::string, EnsembleSummary>>& rows) {
  std::ostringstream out;
  out << "model,mean_ttf_ps,std_ttf_ps,median,q1,q3,n_failed\n";
  for (const auto& [name, s] : rows)
    out << name << ',' << format_double(s.mean) << ',' << (s.std ? format_double(*s.std) : std::string("nan")) << ','
        << format_double(s.median) << ',' << format_double(s.q1) << ',' << format_double(s.q3) << ',' << s.n_failed
        << '\n';
  return out.str();
}

}  // namespace nnipls
