#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "nnipls/dataset.hpp"
#include "nnipls/force_model.hpp"

namespace nnipls {

struct SplitError {
  double temperature = 0.0;  // K
  double energy_rmse = 0.0;  // meV/atom
  double force_rmse = 0.0;   // meV/A
  std::size_t n_frames = 0;
  std::size_t n_components = 0;
};

struct RmseTable {
  std::vector<SplitError> splits;  // ascending temperature
  SplitError pooled;               // all splits together; temperature is NaN

  std::string to_csv() const;  // split,T,energy_rmse_mev_per_atom,force_rmse_mev_per_ang,n_frames
};

RmseTable rmse_by_split(const ForceModel& model, const std::map<double, Dataset>& tests, unsigned threads = 1);

/// y = m x + b by ordinary least squares.
struct SlopeFit {
  double m = 0.0;
  double b = 0.0;
  double r2 = 0.0;
  std::string x_definition;
  std::string y_definition;
  bool x_log = false;
  bool y_log = false;
  std::size_t n_points = 0;

  std::string to_json() const;
};

SlopeFit ols_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Force RMSE (meV/A) against test temperature (K), both linear.
SlopeFit extrapolation_slope(const std::vector<std::pair<double, double>>& temperature_rmse);

/// log n = m log eps + b with natural logs; points are (n, eps).
SlopeFit learning_curve_slope(const std::vector<std::pair<double, double>>& size_rmse);

struct Correlation {
  double pearson = 0.0;
  double spearman = 0.0;
};

Correlation correlate(const std::vector<double>& xs, const std::vector<double>& ys);

struct ToyCell {
  std::size_t n = 0;
  double sigma = 0.0;
  double mean_rmse = 0.0;
  double stderr_rmse = 0.0;
  std::size_t repeats = 0;
};

struct ToyRegressionResult {
  std::vector<ToyCell> cells;  // N-major, then sigma

  const ToyCell& at(std::size_t n, double sigma) const;
  std::string to_csv() const;  // n,sigma,mean_rmse,stderr_rmse,repeats
};

/// Fits y_hat = A x + B to noisy samples of y = 2x + 1 on N evenly spaced
/// x in [0, 1] and reports the RMSE of y_hat against the noiseless line.
ToyRegressionResult toy_regression_experiment(const std::vector<std::size_t>& n_list,
                                              const std::vector<double>& sigma_list, std::size_t repeats,
                                              std::uint64_t seed, unsigned threads = 1);

/// One repeat of the toy experiment; returns (A, B, rmse).
struct ToyFit {
  double a = 0.0;
  double b = 0.0;
  double rmse = 0.0;
};
ToyFit toy_regression_once(std::size_t n, double sigma, std::uint64_t seed);

}  // namespace nnipls
