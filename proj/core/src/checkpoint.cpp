#include "nnipls/checkpoint.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "nnipls/errors.hpp"

namespace nnipls {

using nlohmann::json;

std::string model_to_json(const NeuralPotential& m) {
  json j;
  j["format"] = "nnipls-model";
  j["version"] = 1;
  const auto& d = m.descriptor();
  j["descriptor"] = {{"centers", d.centers},
                     {"widths", d.widths},
                     {"cutoff", d.cutoff},
                     {"trainable_basis", d.trainable_basis}};
  j["hidden_widths"] = m.hidden_widths();
  j["activation"] = NeuralPotential::activation();
  j["rescale"] = {{"scale", m.rescale().scale}, {"shift", m.rescale().shift}, {"enabled", m.rescale().enabled}};
  j["parameters"] = m.parameters().values;
  json blocks = json::array();
  for (const auto& b : m.parameters().partition.blocks)
    blocks.push_back(
        {{"layer", b.layer}, {"filter", b.filter}, {"offset", b.offset}, {"length", b.length}, {"frozen", b.frozen}});
  j["partition"] = std::move(blocks);
  return j.dump(1);
}

NeuralPotential model_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "nnipls-model") throw InvalidArgument("not an nnipls model checkpoint");
    if (j.value("activation", "") != NeuralPotential::activation())
      throw InvalidArgument("unsupported activation '" + j.value("activation", "") + "'");
    DescriptorSpec d;
    d.centers = j.at("descriptor").at("centers").get<std::vector<double>>();
    d.widths = j.at("descriptor").at("widths").get<std::vector<double>>();
    d.cutoff = j.at("descriptor").at("cutoff").get<double>();
    d.trainable_basis = j.at("descriptor").at("trainable_basis").get<bool>();
    Rescale r;
    r.scale = j.at("rescale").at("scale").get<double>();
    r.shift = j.at("rescale").at("shift").get<double>();
    r.enabled = j.at("rescale").at("enabled").get<bool>();
    ParameterVector p;
    p.values = j.at("parameters").get<std::vector<double>>();
    for (const auto& b : j.at("partition"))
      p.partition.blocks.push_back({b.at("layer").get<std::size_t>(), b.at("filter").get<std::size_t>(),
                                    b.at("offset").get<std::size_t>(), b.at("length").get<std::size_t>(),
                                    b.at("frozen").get<bool>()});
    return NeuralPotential(std::move(d), j.at("hidden_widths").get<std::vector<std::size_t>>(), r, std::move(p));
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed model checkpoint: ") + e.what());
  }
}

void save_model(const std::string& path, const NeuralPotential& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << model_to_json(m) << '\n';
}

NeuralPotential load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace nnipls
