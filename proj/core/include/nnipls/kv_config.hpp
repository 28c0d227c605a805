#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nnipls/md.hpp"
#include "nnipls/training.hpp"

namespace nnipls {

/// `key = value` settings, one per line; `#` starts a comment. Later
/// assignments override earlier ones, so command-line overrides are applied
/// with set() after the file is read. Values are parsed on access and every
/// accessed key is remembered so unknown keys can be reported.
class KvConfig {
 public:
  static KvConfig parse(const std::string& text, const std::string& source = "config");
  static KvConfig from_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::uint64_t> get_uint(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<double>> get_doubles(const std::string& key) const;
  std::optional<std::vector<std::size_t>> get_sizes(const std::string& key) const;

  std::string string_or(const std::string& key, const std::string& fallback) const;
  double double_or(const std::string& key, double fallback) const;
  std::uint64_t uint_or(const std::string& key, std::uint64_t fallback) const;
  bool bool_or(const std::string& key, bool fallback) const;

  /// Throws ConfigError naming the first key not in `known`.
  void check_known(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// `epoch:w_E:w_F` entries separated by commas.
std::vector<WeightStep> parse_weight_schedule(const std::string& text);
std::string format_weight_schedule(const std::vector<WeightStep>& s);

/// Reads train.* keys over the defaults.
TrainConfig train_config_from(const KvConfig& kv);
/// Reads md.* keys over the defaults.
MDConfig md_config_from(const KvConfig& kv);

std::set<std::string> train_config_keys();
std::set<std::string> md_config_keys();

}  // namespace nnipls
