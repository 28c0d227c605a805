#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "nnipls/dataset.hpp"

namespace nnipls {

/// Reads an extended-XYZ stream. Recognised comment keys: `energy`,
/// `temperature` (K), `Lattice`, `pbc` and `Properties` (columns
/// `species:S:1`, `pos:R:3`, optionally `forces:R:3`; other columns are skipped).
/// Errors carry the zero-based frame index (ParseError).
Dataset parse_extxyz(std::istream& in, const std::string& name = "dataset");
Dataset parse_extxyz_string(std::string_view text, const std::string& name = "dataset");
Dataset read_extxyz_file(const std::string& path);

/// Writes every frame with 17 significant digits and a fixed key order:
/// Lattice, Properties, energy, temperature, pbc.
void write_extxyz(std::ostream& out, const Dataset& d);
std::string write_extxyz_string(const Dataset& d);
void write_extxyz_file(const std::string& path, const Dataset& d);

/// "%.17g" formatting shared by every text artifact; infinities print as inf/-inf.
std::string format_double(double x);

}  // namespace nnipls
