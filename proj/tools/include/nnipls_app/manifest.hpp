#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace nnipls::app {

std::string sha256_hex(const std::string& bytes);

struct Artifact {
  std::string name;  // relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct Manifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double wall_time_s = 0.0;
  std::vector<Artifact> artifacts;
  int exit_code = 0;
  std::string error_category;
  std::string error_message;

  std::string to_json() const;
};

/// Writes `content` to dir/name and returns its artifact record.
Artifact write_artifact(const std::filesystem::path& dir, const std::string& name, const std::string& content);

}  // namespace nnipls::app
