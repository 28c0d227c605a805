#include "nnipls/kv_config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "nnipls/errors.hpp"
#include "nnipls/extxyz.hpp"

namespace nnipls {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError("config key '" + key + "': not a number: " + v);
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("config key '" + key + "': not a non-negative integer: " + v);
  return x;
}

}  // namespace

KvConfig KvConfig::parse(const std::string& text, const std::string& source) {
  KvConfig kv;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(n) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(n) + ": empty key");
    kv.set(key, trim(line.substr(eq + 1)));
  }
  return kv;
}

KvConfig KvConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return parse(s.str(), path);
}

void KvConfig::set(const std::string& key, const std::string& value) { values_[key] = value; }
bool KvConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::optional<std::string> KvConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> KvConfig::get_double(const std::string& key) const {
  const auto v = get_string(key);
  if (!v) return std::nullopt;
  return to_double(key, *v);
}

std::optional<std::uint64_t> KvConfig::get_uint(const std::string& key) const {
  const auto v = get_string(key);
  if (!v) return std::nullopt;
  return to_uint(key, *v);
}

std::optional<bool> KvConfig::get_bool(const std::string& key) const {
  const auto v = get_string(key);
  if (!v) return std::nullopt;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  throw ConfigError("config key '" + key + "': not a boolean: " + *v);
}

std::optional<std::vector<double>> KvConfig::get_doubles(const std::string& key) const {
  const auto v = get_string(key);
  if (!v) return std::nullopt;
  std::vector<double> out;
  for (const auto& item : split(*v, ',')) out.push_back(to_double(key, item));
  return out;
}

std::optional<std::vector<std::size_t>> KvConfig::get_sizes(const std::string& key) const {
  const auto v = get_string(key);
  if (!v) return std::nullopt;
  std::vector<std::size_t> out;
  for (const auto& item : split(*v, ',')) out.push_back(static_cast<std::size_t>(to_uint(key, item)));
  return out;
}

std::string KvConfig::string_or(const std::string& key, const std::string& fallback) const {
  return get_string(key).value_or(fallback);
}
double KvConfig::double_or(const std::string& key, double fallback) const { return get_double(key).value_or(fallback); }
std::uint64_t KvConfig::uint_or(const std::string& key, std::uint64_t fallback) const {
  return get_uint(key).value_or(fallback);
}
bool KvConfig::bool_or(const std::string& key, bool fallback) const { return get_bool(key).value_or(fallback); }

void KvConfig::check_known(const std::set<std::string>& known) const {
  for (const auto& [k, v] : values_)
    if (!known.count(k)) throw ConfigError("invalid config key: " + k);
}

std::vector<WeightStep> parse_weight_schedule(const std::string& text) {
  std::vector<WeightStep> out;
  for (const auto& entry : split(text, ',')) {
    const auto f = split(entry, ':');
    if (f.size() != 3) throw ConfigError("weight_schedule entry must be epoch:w_E:w_F, got '" + entry + "'");
    out.push_back({static_cast<std::size_t>(to_uint("weight_schedule", f[0])), to_double("weight_schedule", f[1]),
                   to_double("weight_schedule", f[2])});
  }
  if (out.empty()) throw ConfigError("weight_schedule is empty");
  return out;
}

std::string format_weight_schedule(const std::vector<WeightStep>& s) {
  std::string out;
  for (const auto& w : s) {
    if (!out.empty()) out += ',';
    out += std::to_string(w.epoch) + ':' + format_double(w.w_energy) + ':' + format_double(w.w_force);
  }
  return out;
}

TrainConfig train_config_from(const KvConfig& kv) {
  TrainConfig c;
  c.max_epochs = kv.uint_or("train.max_epochs", c.max_epochs);
  c.batch_size = kv.uint_or("train.batch_size", c.batch_size);
  c.lr0 = kv.double_or("train.lr0", c.lr0);
  c.amsgrad = kv.bool_or("train.amsgrad", c.amsgrad);
  if (auto v = kv.get_double("train.ema_decay")) c.ema_decay = *v;
  c.plateau.patience = kv.uint_or("train.plateau.patience", c.plateau.patience);
  c.plateau.factor = kv.double_or("train.plateau.factor", c.plateau.factor);
  if (auto v = kv.get_string("train.weight_schedule")) c.weight_schedule = parse_weight_schedule(*v);
  if (auto v = kv.get_uint("train.swa_tail")) c.swa_tail = static_cast<std::size_t>(*v);
  c.seed = kv.uint_or("seed", c.seed);
  c.threads = static_cast<unsigned>(kv.uint_or("threads", c.threads));
  c.validate();
  return c;
}

MDConfig md_config_from(const KvConfig& kv) {
  MDConfig c;
  c.temperature = kv.double_or("md.temperature", c.temperature);
  c.timestep = kv.double_or("md.timestep", c.timestep);
  c.tau = kv.double_or("md.tau", c.tau);
  c.total_time = kv.double_or("md.total_time", c.total_time);
  c.n_trajectories = kv.uint_or("md.n_trajectories", c.n_trajectories);
  c.failure_bond_length = kv.double_or("md.failure_bond_length", c.failure_bond_length);
  c.trace_interval = kv.uint_or("md.trace_interval", c.trace_interval);
  c.dump_interval = kv.uint_or("md.dump_interval", c.dump_interval);
  if (auto v = kv.get_string("md.bond_list")) {
    for (const auto& entry : split(*v, ',')) {
      const auto f = split(entry, '-');
      if (f.size() != 2) throw ConfigError("md.bond_list entry must be i-j, got '" + entry + "'");
      c.bond_list.emplace_back(to_uint("md.bond_list", f[0]), to_uint("md.bond_list", f[1]));
    }
  }
  c.seed = kv.uint_or("seed", c.seed);
  c.threads = static_cast<unsigned>(kv.uint_or("threads", c.threads));
  return c;
}

std::set<std::string> train_config_keys() {
  return {"train.max_epochs",       "train.batch_size",     "train.lr0",
          "train.amsgrad",          "train.ema_decay",      "train.plateau.patience",
          "train.plateau.factor",   "train.weight_schedule", "train.swa_tail"};
}

std::set<std::string> md_config_keys() {
  return {"md.temperature",         "md.timestep",      "md.tau",           "md.total_time",  "md.n_trajectories",
          "md.failure_bond_length", "md.trace_interval", "md.dump_interval", "md.bond_list"};
}

}  // namespace nnipls
