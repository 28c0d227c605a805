#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nnipls/dataset.hpp"
#include "nnipls/force_model.hpp"

namespace nnipls {

struct RelaxOptions {
  std::size_t max_steps = 5000;
  double force_tolerance = 1e-6;  // eV/A, max force component
  double max_step = 0.1;          // A
};

/// FIRE minimization of the model energy. Returns the relaxed geometry with
/// energy and forces attached.
Configuration relax(const ForceModel& model, const Configuration& start, const RelaxOptions& options = {});

/// n atoms on the simple-cubic sites closest to the origin, spacing `a`.
Configuration compact_cluster(std::size_t n_atoms, double spacing, const std::string& species);

struct GenerateOptions {
  std::string species = "C";
  double spacing = 1.2;            // A, initial lattice spacing before relaxation
  std::size_t stride = 50;         // MD steps between stored frames
  std::size_t equilibration = 1000;
  double timestep = 1.0;           // fs
  double tau = 100.0;              // fs
};

/// Labelled frames from NVT runs of the reference model at each temperature,
/// all started from the relaxed cluster. Frames carry their temperature tag.
Dataset generate_reference_dataset(const ForceModel& reference, std::size_t n_atoms,
                                   const std::vector<double>& temperatures, std::size_t frames_per_temperature,
                                   std::uint64_t seed, const GenerateOptions& options = {},
                                   const std::string& name = "reference");

}  // namespace nnipls
