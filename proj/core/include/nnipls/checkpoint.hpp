#pragma once

#include <string>

#include "nnipls/neural_potential.hpp"

namespace nnipls {

/// JSON checkpoint: descriptor spec, layer widths, activation, rescale
/// constants, flat parameter array and the filter partition table.
std::string model_to_json(const NeuralPotential& m);
NeuralPotential model_from_json(const std::string& text);

void save_model(const std::string& path, const NeuralPotential& m);
NeuralPotential load_model(const std::string& path);

}  // namespace nnipls
