#include "nnipls_app/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <nlohmann/json.hpp>

#include "nnipls/errors.hpp"

namespace nnipls::app {

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw IoError("sha256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

Artifact write_artifact(const std::filesystem::path& dir, const std::string& name, const std::string& content) {
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.close();
  if (!out) throw IoError("write failed for " + path.string());
  return {name, sha256_hex(content), content.size()};
}

std::string Manifest::to_json() const {
  nlohmann::ordered_json arts = nlohmann::ordered_json::array();
  for (const auto& a : artifacts) arts.push_back({{"path", a.name}, {"sha256", a.sha256}, {"bytes", a.bytes}});
  nlohmann::ordered_json j{{"command", command},
                           {"status", exit_code == 0 ? "ok" : "error"},
                           {"exit_code", exit_code},
                           {"seed", seed},
                           {"threads", threads},
                           {"wall_time_s", wall_time_s},
                           {"config", config},
                           {"artifacts", arts}};
  if (exit_code != 0) j["error"] = {{"category", error_category}, {"message", error_message}};
  return j.dump(2);
}

}  // namespace nnipls::app
