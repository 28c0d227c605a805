#include <cmath>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "context.hpp"
#include "nnipls/analysis.hpp"
#include "nnipls/checkpoint.hpp"
#include "nnipls/entropy.hpp"
#include "nnipls/errors.hpp"
#include "nnipls/experiments.hpp"
#include "nnipls/extxyz.hpp"
#include "nnipls/generate.hpp"
#include "nnipls/landscape.hpp"
#include "nnipls/loss.hpp"
#include "nnipls/md.hpp"
#include "nnipls/random.hpp"
#include "nnipls/reference_potential.hpp"

namespace nnipls::app {

namespace {

using json = nlohmann::ordered_json;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::set<std::string> merge(std::initializer_list<std::set<std::string>> sets) {
  std::set<std::string> out;
  for (const auto& s : sets) out.insert(s.begin(), s.end());
  return out;
}

const std::set<std::string> kPotentialKeys{"potential.kind",    "potential.depth",   "potential.stiffness",
                                           "potential.r0",      "potential.cutoff",  "potential.epsilon",
                                           "potential.sigma"};
const std::set<std::string> kModelKeys{"model.n_radial", "model.cutoff", "model.hidden", "model.trainable_basis",
                                       "model.rescale"};
const std::set<std::string> kGridKeys{"landscape.n_directions", "landscape.t_min", "landscape.t_max",
                                      "landscape.t_points", "landscape.frozen_layers", "landscape.cache_origin"};

ReferencePotential reference_from(const KvConfig& kv) {
  const auto kind = kv.string_or("potential.kind", "morse");
  if (kind == "morse")
    return ReferencePotential::morse(kv.double_or("potential.depth", 2.0), kv.double_or("potential.stiffness", 2.0),
                                     kv.double_or("potential.r0", 1.2), kv.double_or("potential.cutoff", 4.0));
  if (kind == "lj")
    return ReferencePotential::lennard_jones(kv.double_or("potential.epsilon", 0.0103),
                                             kv.double_or("potential.sigma", 3.4),
                                             kv.double_or("potential.cutoff", 0.0));
  throw ConfigError("potential.kind must be morse or lj, got '" + kind + "'");
}

ModelSpec model_spec_from(const KvConfig& kv) {
  ModelSpec s;
  s.n_radial = kv.uint_or("model.n_radial", s.n_radial);
  s.cutoff = kv.double_or("model.cutoff", s.cutoff);
  if (auto h = kv.get_sizes("model.hidden")) s.hidden = *h;
  s.trainable_basis = kv.bool_or("model.trainable_basis", s.trainable_basis);
  s.rescale = kv.bool_or("model.rescale", s.rescale);
  return s;
}

TrainConfig train_config(const Context& ctx) {
  auto c = train_config_from(ctx.kv);
  c.threads = ctx.threads;
  return c;
}

std::string stem(const std::string& path) { return std::filesystem::path(path).stem().string(); }

std::map<double, Dataset> split_by_tag(const Dataset& d) {
  std::map<double, std::vector<Configuration>> groups;
  for (const auto& c : d) groups[c.temperature_tag.value_or(0.0)].push_back(c);
  std::map<double, Dataset> out;
  for (auto& [t, frames] : groups)
    out.emplace(t, Dataset(d.name() + "_T" + format_double(t), std::move(frames)));
  return out;
}

std::vector<double> grid_from(const KvConfig& kv, const std::string& prefix, double lo, double hi, std::size_t n) {
  return uniform_grid(kv.double_or(prefix + ".t_min", lo), kv.double_or(prefix + ".t_max", hi),
                      kv.uint_or(prefix + ".t_points", n));
}

LandscapeOptions landscape_options(const Context& ctx) {
  LandscapeOptions o;
  o.threads = ctx.threads;
  o.cache_origin = ctx.kv.bool_or("landscape.cache_origin", true);
  if (auto f = ctx.kv.get_sizes("landscape.frozen_layers")) o.frozen_layers = *f;
  return o;
}

// Commands.

void cmd_gen_data(Context& ctx) {
  const auto& kv = ctx.kv;
  const auto pot = reference_from(kv);
  GenerateOptions g;
  g.species = kv.string_or("gen.species", g.species);
  g.spacing = kv.double_or("gen.spacing", g.spacing);
  g.stride = kv.uint_or("gen.stride", g.stride);
  g.equilibration = kv.uint_or("gen.equilibration", g.equilibration);
  g.timestep = kv.double_or("gen.timestep", g.timestep);
  g.tau = kv.double_or("gen.tau", g.tau);
  const auto temps = kv.get_doubles("gen.temperatures").value_or(std::vector<double>{300.0, 600.0, 1200.0});
  const auto d = generate_reference_dataset(pot, kv.uint_or("gen.n_atoms", 6), temps,
                                            kv.uint_or("gen.frames_per_temperature", 100), ctx.seed, g, "generated");
  ctx.write("dataset.xyz", write_extxyz_string(d));
  ctx.write("ground_state.xyz", write_extxyz_string(Dataset(
                                    "ground", {relax(pot, compact_cluster(kv.uint_or("gen.n_atoms", 6), g.spacing,
                                                                          g.species))})));
  const auto s = dataset_stats(d);
  json counts = json::object();
  for (const auto& [t, n] : s.counts_per_temperature) counts[format_double(t)] = n;
  const json stats{{"potential", pot.description()},
                   {"n_configurations", s.n_configurations},
                   {"n_atoms", s.n_atoms},
                   {"energy_mean_mev_per_atom", s.energy_mean_mev_per_atom},
                   {"energy_std_mev_per_atom", s.energy_std_mev_per_atom},
                   {"force_mean_ev_per_ang", s.force_mean},
                   {"force_std_ev_per_ang", s.force_std},
                   {"counts_per_temperature", counts}};
  ctx.write("dataset_stats.json", stats.dump(2) + "\n");
  if (auto t = kv.get_double("split.train_temperature")) {
    const auto sp = split_by_temperature(d, *t, kv.double_or("split.holdout_fraction", 0.1),
                                         substream_seed(ctx.seed, "split"));
    ctx.write("train.xyz", write_extxyz_string(sp.train));
    std::vector<Configuration> tests;
    for (const auto& [temp, ds] : sp.tests) tests.insert(tests.end(), ds.begin(), ds.end());
    ctx.write("tests.xyz", write_extxyz_string(Dataset("tests", std::move(tests))));
  }
}

void cmd_train(Context& ctx) {
  const auto& kv = ctx.kv;
  auto d = read_extxyz_file(ctx.input_path("dataset"));
  if (auto sigma = kv.get_double("noise.sigma"); sigma && *sigma > 0.0)
    d = corrupt_labels(d, {*sigma, parse_noise_target(kv.string_or("noise.target", "forces")),
                           substream_seed(ctx.seed, "noise")});
  std::optional<Dataset> validation;
  if (kv.has("validation")) validation = read_extxyz_file(ctx.input_path("validation"));
  const auto spec = model_spec_from(kv);
  const auto cfg = train_config(ctx);
  auto m = build_model(spec, cfg.seed, d);
  const auto report = train(m, d, cfg, validation ? &*validation : nullptr);
  m.set_parameter_values(report.selected_params());
  const auto final_loss = loss_eval(m, d, {}, {}, ctx.threads);
  ctx.write("model.json", model_to_json(m) + "\n");
  ctx.write("history.csv", history_csv(report));
  const json summary{{"epochs", report.history.size()},
                     {"best_epoch", report.best_epoch},
                     {"selected", report.swa_params ? "swa" : report.ema_params ? "ema" : "best"},
                     {"loss_energy_mev_per_atom", final_loss.loss_energy},
                     {"loss_force_mev_per_ang", final_loss.loss_force},
                     {"rescale", spec.rescale},
                     {"weight_schedule", format_weight_schedule(cfg.weight_schedule)}};
  ctx.write("train_summary.json", summary.dump(2) + "\n");
}

void cmd_eval(Context& ctx) {
  const auto m = load_model(ctx.input_path("model"));
  const auto d = read_extxyz_file(ctx.input_path("dataset"));
  const auto table = rmse_by_split(m, split_by_tag(d), ctx.threads);
  ctx.write("rmse.csv", table.to_csv());
}

void cmd_landscape1d(Context& ctx) {
  const auto path = ctx.input_path("model");
  const auto m = load_model(path);
  const auto d = read_extxyz_file(ctx.input_path("dataset"));
  auto p = landscape_1d(m, d, ctx.kv.uint_or("landscape.n_directions", 20), grid_from(ctx.kv, "landscape", -1, 1, 21),
                        ctx.seed, landscape_options(ctx));
  p.meta.model_id = stem(path);
  p.meta.dataset_id = stem(ctx.kv.string_or("dataset", ""));
  ctx.write("profile.csv", profile_csv(p));
  ctx.write("profile.json", profile_metadata_json(p) + "\n");
}

void cmd_landscape2d(Context& ctx) {
  const auto path = ctx.input_path("model");
  const auto m = load_model(path);
  const auto d = read_extxyz_file(ctx.input_path("dataset"));
  const auto grid = grid_from(ctx.kv, "landscape", -1, 1, 21);
  auto s = landscape_2d(m, d, grid, grid, ctx.seed, landscape_options(ctx));
  s.meta.model_id = stem(path);
  s.meta.dataset_id = stem(ctx.kv.string_or("dataset", ""));
  ctx.write("surface.csv", surface_csv(s));
  ctx.write("surface.json", surface_metadata_json(s) + "\n");
  if (auto w = ctx.kv.get_doubles("landscape.reweight")) {
    if (w->size() != 2) throw ConfigError("landscape.reweight expects w_E,w_F");
    const auto combined = reweight_surface(s, (*w)[0], (*w)[1]);
    std::ostringstream out;
    out << "t1,t2,loss_combined\n";
    for (std::size_t i = 0; i < s.t1_grid.size(); ++i)
      for (std::size_t j = 0; j < s.t2_grid.size(); ++j)
        out << format_double(s.t1_grid[i]) << ',' << format_double(s.t2_grid[j]) << ','
            << format_double(combined[i * s.t2_grid.size() + j]) << '\n';
    ctx.write("surface_reweighted.csv", out.str());
  }
}

void cmd_interp(Context& ctx) {
  const auto a = load_model(ctx.input_path("model"));
  const auto b = load_model(ctx.input_path("model_b"));
  const auto d = read_extxyz_file(ctx.input_path("dataset"));
  auto p = interpolate_models(a, b, d, grid_from(ctx.kv, "interp", 0, 1, 21), ctx.threads);
  p.meta.model_id = stem(ctx.kv.string_or("model", "")) + "->" + stem(ctx.kv.string_or("model_b", ""));
  p.meta.dataset_id = stem(ctx.kv.string_or("dataset", ""));
  ctx.write("interp.csv", profile_csv(p));
  ctx.write("interp.json", profile_metadata_json(p) + "\n");
}

LandscapeProfile load_profile(Context& ctx) {
  const auto path = ctx.input_path("profile");
  auto p = profile_from_csv(read_text(path));
  p.meta.model_id = std::filesystem::path(path).filename().string();
  return p;
}

void cmd_entropy(Context& ctx) {
  const auto p = load_profile(ctx);
  const auto r = entropy_from_profile(p, ctx.kv.double_or("entropy.T_E", kDefaultTEnergy),
                                      ctx.kv.double_or("entropy.T_F", kDefaultTForce),
                                      ctx.kv.double_or("entropy.alpha", kDefaultAlpha));
  ctx.write("entropy.json", r.to_json() + "\n");
}

void cmd_sweep_entropy(Context& ctx) {
  const auto& kv = ctx.kv;
  const auto p = load_profile(ctx);
  const double te = kv.double_or("entropy.T_E", kDefaultTEnergy);
  const double tf = kv.double_or("entropy.T_F", kDefaultTForce);
  const auto sw = temperature_sweep(p, kv.double_or("sweep.T_E_min", te / 4), kv.double_or("sweep.T_E_max", te * 4),
                                    kv.double_or("sweep.T_F_min", tf / 4), kv.double_or("sweep.T_F_max", tf * 4),
                                    kv.uint_or("sweep.points", 9), kv.double_or("entropy.alpha", kDefaultAlpha));
  ctx.write("entropy_sweep.csv", sw.to_csv());
  ctx.write("entropy_sweep.json", sw.metadata_json() + "\n");
}

void cmd_md(Context& ctx) {
  const auto start_set = read_extxyz_file(ctx.input_path("start"));
  const auto& start = start_set[0];
  auto cfg = md_config_from(ctx.kv);
  cfg.threads = ctx.threads;
  std::string id;
  EnsembleResult r;
  if (ctx.kv.has("model")) {
    const auto path = ctx.input_path("model");
    id = stem(path);
    r = run_ensemble(load_model(path), start, cfg);
  } else {
    const auto pot = reference_from(ctx.kv);
    id = "reference";
    r = run_ensemble(pot, start, cfg);
  }
  ctx.write("md.json", ensemble_json(r, id) + "\n");
  ctx.write("md_summary.csv", summary_csv({{id, r.summary}}));
  if (cfg.dump_interval > 0) {
    for (const auto& rec : r.records) {
      if (rec.frames.empty()) continue;
      ctx.write("traj_" + std::to_string(rec.index) + ".xyz", write_extxyz_string(Dataset("traj", rec.frames)));
    }
  }
}

void cmd_noise_sweep(Context& ctx) {
  const auto d = read_extxyz_file(ctx.input_path("dataset"));
  const auto sigmas = ctx.kv.get_doubles("noise.sigmas").value_or(std::vector<double>{0.0, 0.05, 0.1});
  const auto rows = noise_sweep(d, sigmas, model_spec_from(ctx.kv), train_config(ctx), ctx.seed);
  ctx.write("noise_sweep.csv", noise_sweep_csv(rows));
}

void cmd_learning_curve(Context& ctx) {
  const auto train_set = read_extxyz_file(ctx.input_path("dataset"));
  const auto tests = read_extxyz_file(ctx.input_path("tests"));
  const auto sizes = ctx.kv.get_sizes("lc.sizes").value_or(std::vector<std::size_t>{25, 125, 250, 500});
  const auto lc = learning_curve(train_set, split_by_tag(tests), sizes, model_spec_from(ctx.kv), train_config(ctx),
                                 ctx.seed);
  ctx.write("learning_curve.csv", lc.to_csv());
  ctx.write("learning_curve_fit.json", lc.fit.to_json() + "\n");
}

void cmd_toy_regression(Context& ctx) {
  const auto& kv = ctx.kv;
  const auto n_list =
      kv.get_sizes("toy.n_list").value_or(std::vector<std::size_t>{2, 5, 10, 50, 100, 500, 1000, 5000, 10000});
  const auto sigmas = kv.get_doubles("toy.sigmas").value_or(std::vector<double>{0.0, 0.5, 1.0, 2.0});
  const auto r = toy_regression_experiment(n_list, sigmas, kv.uint_or("toy.repeats", 100), ctx.seed, ctx.threads);
  ctx.write("toy_regression.csv", r.to_csv());
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string item;
    std::istringstream ls(line);
    while (std::getline(ls, item, ',')) f.push_back(item);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    rows.push_back(std::move(f));
  }
  if (rows.empty()) throw IoError(path + " is empty");
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name, const std::string& path) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw IoError(path + ": missing column " + name);
}

double number(const std::string& s, const std::string& path) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(path + ": non-numeric value '" + s + "'");
  }
}

void cmd_fit_slopes(Context& ctx) {
  json out = json::object();
  if (ctx.kv.has("rmse")) {
    const auto path = ctx.input_path("rmse");
    const auto rows = read_csv(path);
    const auto t_col = column(rows[0], "T", path);
    const auto f_col = column(rows[0], "force_rmse_mev_per_ang", path);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i][0] == "pooled") continue;
      pts.emplace_back(number(rows[i].at(t_col), path), number(rows[i].at(f_col), path));
    }
    out["extrapolation"] = json::parse(extrapolation_slope(pts).to_json());
  }
  if (ctx.kv.has("learning_curve")) {
    const auto path = ctx.input_path("learning_curve");
    const auto rows = read_csv(path);
    const auto n_col = column(rows[0], "n", path);
    const auto f_col = column(rows[0], "force_rmse_pooled", path);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 1; i < rows.size(); ++i)
      pts.emplace_back(number(rows[i].at(n_col), path), number(rows[i].at(f_col), path));
    out["learning_curve"] = json::parse(learning_curve_slope(pts).to_json());
  }
  if (out.empty()) throw ConfigError("fit-slopes needs --rmse and/or --learning-curve");
  ctx.write("slopes.json", out.dump(2) + "\n");
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> kCommands{
      {"gen-data",
       "generate a labelled reference dataset from NVT runs",
       merge({kPotentialKeys,
              {"gen.n_atoms", "gen.temperatures", "gen.frames_per_temperature", "gen.species", "gen.spacing",
               "gen.stride", "gen.equilibration", "gen.timestep", "gen.tau", "split.train_temperature",
               "split.holdout_fraction"}}),
       {},
       cmd_gen_data},
      {"train",
       "train a neural potential",
       merge({kModelKeys, train_config_keys(), {"noise.sigma", "noise.target"}}),
       {{"--dataset", "dataset", "training set (extended XYZ)"},
        {"--validation", "validation", "validation set (extended XYZ)"}},
       cmd_train},
      {"eval",
       "per-temperature RMSE of a model",
       {},
       {{"--model", "model", "model checkpoint"}, {"--dataset", "dataset", "test set (extended XYZ)"}},
       cmd_eval},
      {"landscape1d",
       "direction-averaged 1D loss landscape",
       kGridKeys,
       {{"--model", "model", "model checkpoint"}, {"--dataset", "dataset", "training set (extended XYZ)"}},
       cmd_landscape1d},
      {"landscape2d",
       "2D loss surface on an orthogonal plane",
       merge({kGridKeys, {"landscape.reweight"}}),
       {{"--model", "model", "model checkpoint"}, {"--dataset", "dataset", "training set (extended XYZ)"}},
       cmd_landscape2d},
      {"interp",
       "loss along the segment between two models",
       {"interp.t_min", "interp.t_max", "interp.t_points"},
       {{"--model", "model", "first model"},
        {"--model-b", "model_b", "second model"},
        {"--dataset", "dataset", "training set (extended XYZ)"}},
       cmd_interp},
      {"entropy",
       "loss entropy of a stored profile",
       {"entropy.T_E", "entropy.T_F", "entropy.alpha"},
       {{"--profile", "profile", "profile CSV"}},
       cmd_entropy},
      {"sweep-entropy",
       "loss entropy over a range of temperatures",
       {"entropy.T_E", "entropy.T_F", "entropy.alpha", "sweep.T_E_min", "sweep.T_E_max", "sweep.T_F_min",
        "sweep.T_F_max", "sweep.points"},
       {{"--profile", "profile", "profile CSV"}},
       cmd_sweep_entropy},
      {"md",
       "NVT time-to-failure ensemble",
       merge({md_config_keys(), kPotentialKeys}),
       {{"--model", "model", "model checkpoint (reference potential when omitted)"},
        {"--start", "start", "start geometry (first frame is used)"}},
       cmd_md},
      {"noise-sweep",
       "train on force-corrupted labels and compare against the originals",
       merge({kModelKeys, train_config_keys(), {"noise.sigmas"}}),
       {{"--dataset", "dataset", "clean training set (extended XYZ)"}},
       cmd_noise_sweep},
      {"learning-curve",
       "errors against training-set size",
       merge({kModelKeys, train_config_keys(), {"lc.sizes"}}),
       {{"--dataset", "dataset", "training pool (extended XYZ)"},
        {"--tests", "tests", "temperature-tagged test frames"}},
       cmd_learning_curve},
      {"toy-regression",
       "linear-regression noise experiment",
       {"toy.n_list", "toy.sigmas", "toy.repeats"},
       {},
       cmd_toy_regression},
      {"fit-slopes",
       "extrapolation and learning-curve slopes",
       {},
       {{"--rmse", "rmse", "rmse.csv from eval"}, {"--learning-curve", "learning_curve", "learning_curve.csv"}},
       cmd_fit_slopes},
  };
  return kCommands;
}

}  // namespace nnipls::app
