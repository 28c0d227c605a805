#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "nnipls/kv_config.hpp"
#include "nnipls_app/manifest.hpp"

namespace nnipls::app {

struct Context {
  std::string command;
  KvConfig kv;
  std::filesystem::path out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  Manifest manifest;

  /// Writes an artifact into the output directory and records its hash.
  void write(const std::string& name, const std::string& content);
  /// Path-valued key that must name an existing file.
  std::string input_path(const std::string& key) const;
  std::string output_path(const std::string& name) const { return (out_dir / name).string(); }
};

struct PathFlag {
  std::string flag;  // e.g. "--dataset"
  std::string key;   // config key it sets
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::set<std::string> keys;  // config keys read by the command, on top of the global ones
  std::vector<PathFlag> paths;
  std::function<void(Context&)> run;
};

const std::vector<Command>& commands();

}  // namespace nnipls::app
