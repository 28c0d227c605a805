#include "nnipls/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nnipls/errors.hpp"
#include "nnipls/extxyz.hpp"

namespace nnipls {

double loss_entropy(std::span<const double> curve, double kT) {
  if (curve.empty()) throw InvalidArgument("loss_entropy: empty curve");
  if (!(kT > 0.0) || !std::isfinite(kT)) throw InvalidArgument("loss_entropy: kT must be positive");
  double lo = std::numeric_limits<double>::infinity();
  for (double v : curve) {
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity())
      throw InvalidArgument("loss_entropy: curve contains NaN or -inf");
    lo = std::min(lo, v);
  }
  if (std::isinf(lo)) return -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double v : curve)
    if (std::isfinite(v)) sum += std::exp(-(v - lo) / kT);
  return std::log(sum) - lo / kT;
}

double weighted_entropy(double s_energy, double s_force, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  return alpha * s_energy + (1.0 - alpha) * s_force;
}

std::string EntropyReport::to_json() const {
  const nlohmann::ordered_json j{{"S_E", s_energy},
                                 {"S_F", s_force},
                                 {"S", s},
                                 {"T_E_mev_per_atom", t_energy},
                                 {"T_F_mev_per_ang", t_force},
                                 {"alpha", alpha},
                                 {"k", k},
                                 {"grid_points", grid_points},
                                 {"profile_ref", profile_ref}};
  return j.dump(2);
}

EntropyReport entropy_from_profile(const LandscapeProfile& p, double t_energy, double t_force, double alpha) {
  if (p.mean_energy.empty() || p.mean_energy.size() != p.t_grid.size() || p.mean_force.size() != p.t_grid.size())
    throw InvalidArgument("profile has no averaged curves");
  EntropyReport r;
  r.s_energy = loss_entropy(p.mean_energy, t_energy);
  r.s_force = loss_entropy(p.mean_force, t_force);
  r.s = weighted_entropy(r.s_energy, r.s_force, alpha);
  r.t_energy = t_energy;
  r.t_force = t_force;
  r.alpha = alpha;
  r.grid_points = p.t_grid.size();
  r.profile_ref = p.meta.model_id;
  return r;
}

namespace {

double log_spaced(double lo, double hi, std::size_t i, std::size_t n) {
  if (n == 1) return lo;
  return lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
}

}  // namespace

TemperatureSweep temperature_sweep(const LandscapeProfile& p, double t_energy_lo, double t_energy_hi,
                                   double t_force_lo, double t_force_hi, std::size_t n, double alpha) {
  if (!(t_energy_lo > 0.0 && t_energy_hi >= t_energy_lo && t_force_lo > 0.0 && t_force_hi >= t_force_lo))
    throw InvalidArgument("temperature ranges must be positive and ordered");
  if (n == 0) throw InvalidArgument("temperature sweep needs at least one point");
  TemperatureSweep sw;
  sw.grid_points = p.t_grid.size();
  sw.flat_reference = std::log(static_cast<double>(sw.grid_points));
  sw.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    sw.rows.push_back(entropy_from_profile(p, log_spaced(t_energy_lo, t_energy_hi, i, n),
                                           log_spaced(t_force_lo, t_force_hi, i, n), alpha));
  return sw;
}

std::string TemperatureSweep::to_csv() const {
  std::ostringstream out;
  out << "T_E,T_F,S_E,S_F,S\n";
  for (const auto& r : rows)
    out << format_double(r.t_energy) << ',' << format_double(r.t_force) << ',' << format_double(r.s_energy) << ','
        << format_double(r.s_force) << ',' << format_double(r.s) << '\n';
  return out.str();
}

std::string TemperatureSweep::metadata_json() const {
  const nlohmann::ordered_json j{{"grid_points", grid_points},
                                 {"flat_zero_reference", flat_reference},
                                 {"k", 1.0},
                                 {"alpha", rows.empty() ? kDefaultAlpha : rows.front().alpha},
                                 {"n_temperatures", rows.size()},
                                 {"spacing", "log"}};
  return j.dump(2);
}

}  // namespace nnipls
