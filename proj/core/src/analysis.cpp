#include "nnipls/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "nnipls/errors.hpp"
#include "nnipls/extxyz.hpp"
#include "nnipls/loss.hpp"
#include "nnipls/parallel.hpp"
#include "nnipls/random.hpp"

namespace nnipls {

namespace {

SplitError to_split(double temperature, const SquaredErrors& se) {
  const auto l = se.to_loss({});
  return {temperature, l.loss_energy, l.loss_force, se.n_frames, se.n_components};
}

SquaredErrors split_errors(const ForceModel& model, const Dataset& d, unsigned threads) {
  std::vector<SquaredErrors> per(d.size());
  parallel_for(d.size(), threads, [&](std::size_t i) { per[i] = squared_errors(model, d[i]); });
  SquaredErrors total;
  for (const auto& s : per) total += s;
  return total;
}

}  // namespace

RmseTable rmse_by_split(const ForceModel& model, const std::map<double, Dataset>& tests, unsigned threads) {
  if (tests.empty()) throw InvalidArgument("rmse_by_split: no splits");
  RmseTable t;
  SquaredErrors all;
  for (const auto& [temperature, d] : tests) {
    const auto se = split_errors(model, d, threads);
    if (se.n_frames == 0) throw InvalidArgument("split at " + format_double(temperature) + " K has no labels");
    t.splits.push_back(to_split(temperature, se));
    all += se;
  }
  t.pooled = to_split(std::numeric_limits<double>::quiet_NaN(), all);
  return t;
}

std::string RmseTable::to_csv() const {
  std::ostringstream out;
  out << "split,T,energy_rmse_mev_per_atom,force_rmse_mev_per_ang,n_frames\n";
  for (const auto& s : splits)
    out << format_double(s.temperature) << ',' << format_double(s.temperature) << ',' << format_double(s.energy_rmse)
        << ',' << format_double(s.force_rmse) << ',' << s.n_frames << '\n';
  out << "pooled,," << format_double(pooled.energy_rmse) << ',' << format_double(pooled.force_rmse) << ','
      << pooled.n_frames << '\n';
  return out.str();
}

SlopeFit ols_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw InvalidArgument("fit: x and y lengths differ");
  if (x.size() < 2) throw InvalidArgument("fit needs at least two points");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw InvalidArgument("fit: non-finite point");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw NumericError("fit is singular: x has zero variance");
  SlopeFit f;
  f.m = sxy / sxx;
  f.b = my - f.m * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.m * x[i] + f.b);
    ss_res += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  f.n_points = x.size();
  return f;
}

SlopeFit extrapolation_slope(const std::vector<std::pair<double, double>>& temperature_rmse) {
  std::vector<double> x, y;
  for (const auto& [t, e] : temperature_rmse) {
    x.push_back(t);
    y.push_back(e);
  }
  auto f = ols_fit(x, y);
  f.x_definition = "test temperature, K";
  f.y_definition = "force RMSE, meV/A";
  return f;
}

SlopeFit learning_curve_slope(const std::vector<std::pair<double, double>>& size_rmse) {
  std::vector<double> x, y;
  for (const auto& [n, e] : size_rmse) {
    if (!(n > 0.0) || !(e > 0.0)) throw InvalidArgument("learning curve needs positive sizes and errors");
    x.push_back(std::log(e));
    y.push_back(std::log(n));
  }
  auto f = ols_fit(x, y);
  f.x_definition = "ln force RMSE (meV/A)";
  f.y_definition = "ln training-set size";
  f.x_log = true;
  f.y_log = true;
  return f;
}

std::string SlopeFit::to_json() const {
  const nlohmann::ordered_json j{{"m", m},
                                 {"b", b},
                                 {"r2", r2},
                                 {"x", {{"definition", x_definition}, {"log", x_log}}},
                                 {"y", {{"definition", y_definition}, {"log", y_log}}},
                                 {"log_base", "e"},
                                 {"n_points", n_points}};
  return j.dump(2);
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw NumericError("correlation undefined: zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

Correlation correlate(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("correlate: lengths differ");
  if (xs.size() < 3) throw InvalidArgument("correlate needs at least three points");
  return {pearson(xs, ys), pearson(ranks(xs), ranks(ys))};
}

ToyFit toy_regression_once(std::size_t n, double sigma, std::uint64_t seed) {
  if (n < 2) throw InvalidArgument("toy regression needs N >= 2");
  if (!(sigma >= 0.0)) throw InvalidArgument("toy regression needs sigma >= 0");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(n), r(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    r[i] = sigma * normal(rng);
  }
  // Least squares on the deviation from the true line: y_tilde - (2x + 1).
  const auto f = ols_fit(x, r);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = f.m * x[i] + f.b;
    ss += e * e;
  }
  return {2.0 + f.m, 1.0 + f.b, std::sqrt(ss / static_cast<double>(n))};
}

ToyRegressionResult toy_regression_experiment(const std::vector<std::size_t>& n_list,
                                              const std::vector<double>& sigma_list, std::size_t repeats,
                                              std::uint64_t seed, unsigned threads) {
  if (repeats == 0) throw InvalidArgument("toy regression needs repeats >= 1");
  for (auto n : n_list)
    if (n < 2) throw InvalidArgument("toy regression needs N >= 2");
  const std::size_t n_cells = n_list.size() * sigma_list.size();
  std::vector<double> rmse(n_cells * repeats);
  parallel_for(rmse.size(), threads, [&](std::size_t k) {
    const std::size_t cell = k / repeats;
    const std::size_t n = n_list[cell / sigma_list.size()];
    const double sigma = sigma_list[cell % sigma_list.size()];
    rmse[k] = toy_regression_once(n, sigma, substream_seed(seed, "toy.noise", k)).rmse;
  });
  ToyRegressionResult out;
  for (std::size_t cell = 0; cell < n_cells; ++cell) {
    ToyCell c;
    c.n = n_list[cell / sigma_list.size()];
    c.sigma = sigma_list[cell % sigma_list.size()];
    c.repeats = repeats;
    const auto first = rmse.begin() + static_cast<std::ptrdiff_t>(cell * repeats);
    const auto last = first + static_cast<std::ptrdiff_t>(repeats);
    c.mean_rmse = std::accumulate(first, last, 0.0) / static_cast<double>(repeats);
    if (repeats > 1) {
      double ss = 0.0;
      for (auto it = first; it != last; ++it) ss += (*it - c.mean_rmse) * (*it - c.mean_rmse);
      c.stderr_rmse = std::sqrt(ss / static_cast<double>(repeats - 1) / static_cast<double>(repeats));
    }
    out.cells.push_back(c);
  }
  return out;
}

const ToyCell& ToyRegressionResult::at(std::size_t n, double sigma) const {
  for (const auto& c : cells)
    if (c.n == n && c.sigma == sigma) return c;
  throw InvalidArgument("no toy cell for N = " + std::to_string(n));
}

std::string ToyRegressionResult::to_csv() const {
  std::ostringstream out;
  out << "n,sigma,mean_rmse,stderr_rmse,repeats\n";
  for (const auto& c : cells)
    out << c.n << ',' << format_double(c.sigma) << ',' << format_double(c.mean_rmse) << ','
        << format_double(c.stderr_rmse) << ',' << c.repeats << '\n';
  return out.str();
}

}  // namespace nnipls
