#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nnipls/dataset.hpp"
#include "nnipls/force_model.hpp"

namespace nnipls {

using BondPair = std::pair<std::size_t, std::size_t>;

struct MDConfig {
  double temperature = 1600.0;  // K
  double timestep = 1.0;        // fs
  double tau = 250.0;           // fs; +inf disables the thermostat
  double total_time = 6.0;      // ps
  std::size_t n_trajectories = 30;
  double failure_bond_length = 2.0;  // A
  std::vector<BondPair> bond_list;   // inferred from the start geometry when empty
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t trace_interval = 10;  // steps between temperature samples
  std::size_t dump_interval = 0;    // steps between stored frames, 0 = none

  bool thermostat_enabled() const { return std::isfinite(tau); }
  std::size_t n_steps() const;
  void validate(std::size_t n_atoms) const;
};

struct MDState {
  Configuration config;      // positions in A
  std::vector<Vec3> velocities;  // A/fs
  std::vector<Vec3> forces;      // eV/A
  std::vector<double> masses;    // amu
  double potential_energy = 0.0;  // eV
  double time = 0.0;              // fs
};

double kinetic_energy(const MDState& s);  // eV
/// 2 K / (n_dof k_B) with n_dof = 3N - 3.
double instantaneous_temperature(const MDState& s);

/// Maxwell-Boltzmann draw at T with the centre-of-mass momentum removed and
/// an exact rescale to T. Needs at least two atoms.
std::vector<Vec3> init_velocities(const Configuration& c, double temperature, std::uint64_t seed);

MDState make_state(const ForceModel& model, const Configuration& c, std::vector<Vec3> velocities);

/// Berendsen scaling factor sqrt(1 + dt/tau (T0/T - 1)) clamped to [0.9, 1.1].
double berendsen_lambda(double dt, double tau, double target, double current);

/// One velocity-Verlet step followed by the Berendsen rescale. Throws
/// NumericError when the model returns non-finite forces.
void md_step(MDState& s, const ForceModel& model, const MDConfig& cfg);

struct BondBreak {
  BondPair pair;
  double distance = 0.0;
};

/// First bonded pair whose distance strictly exceeds the threshold.
std::optional<BondBreak> detect_failure(const Configuration& c, const std::vector<BondPair>& bonds, double threshold);
std::optional<BondBreak> detect_failure(const Configuration& c, const MDConfig& cfg);

/// Pairs closer than factor times the shortest pair distance.
std::vector<BondPair> infer_bond_list(const Configuration& c, double factor = 1.2);

struct TrajectoryRecord {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  double time_to_failure = 0.0;  // ps, total_time when the run survives
  bool failed = false;
  std::string cause;  // "", "bond", "numeric" or "error"
  std::optional<BondBreak> failure;
  std::string message;
  std::vector<double> temperature_trace;  // K, every trace_interval steps
  std::vector<Configuration> frames;      // every dump_interval steps
};

using StepObserver = std::function<void(std::size_t step, const MDState&)>;

/// Velocity seed of trajectory `index`.
std::uint64_t trajectory_seed(std::uint64_t seed, std::size_t index);

TrajectoryRecord run_trajectory(const ForceModel& model, const Configuration& start, const MDConfig& cfg,
                                std::size_t index, const StepObserver& observer = {});

struct EnsembleSummary {
  std::size_t n = 0;
  std::size_t n_failed = 0;
  double mean = 0.0;  // ps
  std::optional<double> std;  // sample std; absent for a single trajectory
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Quartile by linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);
EnsembleSummary summarize(const std::vector<TrajectoryRecord>& records);

struct EnsembleResult {
  MDConfig config;
  std::vector<TrajectoryRecord> records;
  EnsembleSummary summary;
};

/// Independent trajectories differing only in their velocity seed. Errors in
/// one trajectory are recorded in its record and do not stop the others.
EnsembleResult run_ensemble(const ForceModel& model, const Configuration& start, const MDConfig& cfg);

std::string ensemble_json(const EnsembleResult& r, const std::string& model_id);
/// model,mean_ttf_ps,std_ttf_ps,median,q1,q3,n_failed
std::string summary_csv(const std::vector<std::pair<std::string, EnsembleSummary>>& rows);

}  // namespace nnipls
