#include "nnipls/extxyz.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "nnipls/errors.hpp"

namespace nnipls {

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

double to_double(std::string_view tok, std::size_t frame, const char* what) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last)
    throw ParseError(frame, std::string("non-numeric ") + what + " '" + std::string(tok) + "'");
  return v;
}

// key=value pairs; values may be double-quoted; bare keys are flags.
std::vector<std::pair<std::string, std::string>> parse_comment(std::string_view line, std::size_t frame) {
  std::vector<std::pair<std::string, std::string>> kv;
  std::size_t i = 0;
  auto skip_ws = [&] {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
  };
  while (true) {
    skip_ws();
    if (i >= line.size()) break;
    const std::size_t ks = i;
    while (i < line.size() && line[i] != '=' && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::string key(line.substr(ks, i - ks));
    skip_ws();
    if (i < line.size() && line[i] == '=') {
      ++i;
      skip_ws();
      std::string value;
      if (i < line.size() && (line[i] == '"' || line[i] == '\'')) {
        const char q = line[i++];
        const std::size_t vs = i;
        while (i < line.size() && line[i] != q) ++i;
        if (i >= line.size()) throw ParseError(frame, "unterminated quote in comment line");
        value = std::string(line.substr(vs, i - vs));
        ++i;
      } else {
        const std::size_t vs = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        value = std::string(line.substr(vs, i - vs));
      }
      kv.emplace_back(std::move(key), std::move(value));
    } else {
      kv.emplace_back(std::move(key), "T");
    }
  }
  return kv;
}

struct Column {
  std::string name;
  char type;
  std::size_t count;
};

std::vector<Column> parse_properties(const std::string& spec, std::size_t frame) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  if (parts.size() % 3 != 0) throw ParseError(frame, "malformed Properties '" + spec + "'");
  std::vector<Column> cols;
  for (std::size_t i = 0; i < parts.size(); i += 3) {
    if (parts[i + 1].size() != 1) throw ParseError(frame, "malformed Properties type '" + parts[i + 1] + "'");
    std::size_t count = 0;
    auto [p, ec] = std::from_chars(parts[i + 2].data(), parts[i + 2].data() + parts[i + 2].size(), count);
    if (ec != std::errc() || count == 0) throw ParseError(frame, "malformed Properties count '" + parts[i + 2] + "'");
    cols.push_back({parts[i], parts[i + 1][0], count});
  }
  return cols;
}

bool parse_flag(std::string_view s) {
  const auto l = lower(std::string(s));
  return l == "t" || l == "true" || l == "1";
}

}  // namespace

Dataset parse_extxyz(std::istream& in, const std::string& name) {
  std::vector<Configuration> frames;
  std::string line;
  std::size_t frame = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::size_t n_atoms = 0;
    {
      const auto t = trim(line);
      auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), n_atoms);
      if (ec != std::errc() || p != t.data() + t.size())
        throw ParseError(frame, "malformed header: expected atom count, got '" + std::string(t) + "'");
    }
    if (!std::getline(in, line)) throw ParseError(frame, "missing comment line");
    const auto kv = parse_comment(line, frame);

    Configuration c;
    std::vector<Column> cols = {{"species", 'S', 1}, {"pos", 'R', 3}};
    std::optional<std::array<bool, 3>> pbc;
    for (const auto& [key, value] : kv) {
      const auto k = lower(key);
      if (k == "energy") {
        c.energy = to_double(trim(value), frame, "energy");
      } else if (k == "temperature") {
        c.temperature_tag = to_double(trim(value), frame, "temperature");
      } else if (k == "lattice") {
        const auto toks = split_ws(value);
        if (toks.size() != 9) throw ParseError(frame, "Lattice needs 9 floats");
        Cell cell;
        for (std::size_t i = 0; i < 9; ++i) cell.vectors[i / 3][i % 3] = to_double(toks[i], frame, "Lattice entry");
        cell.periodic = {true, true, true};
        c.cell = cell;
      } else if (k == "pbc") {
        const auto toks = split_ws(value);
        if (toks.size() != 3) throw ParseError(frame, "pbc needs 3 flags");
        pbc = std::array<bool, 3>{parse_flag(toks[0]), parse_flag(toks[1]), parse_flag(toks[2])};
      } else if (k == "properties") {
        cols = parse_properties(value, frame);
      }
    }
    if (pbc) {
      if (!c.cell) c.cell = Cell{};
      c.cell->periodic = *pbc;
    }

    std::size_t width = 0;
    std::optional<std::size_t> species_col, pos_col, force_col;
    for (const auto& col : cols) {
      const auto n = lower(col.name);
      if (n == "species" && col.type == 'S' && col.count == 1) species_col = width;
      if ((n == "pos" || n == "positions") && col.type == 'R' && col.count == 3) pos_col = width;
      if ((n == "forces" || n == "force") && col.type == 'R' && col.count == 3) force_col = width;
      width += col.count;
    }
    if (!species_col || !pos_col) throw ParseError(frame, "Properties must contain species:S:1 and pos:R:3");

    c.positions.reserve(n_atoms);
    c.species.reserve(n_atoms);
    if (force_col) c.forces.emplace().reserve(n_atoms);
    for (std::size_t a = 0; a < n_atoms; ++a) {
      if (!std::getline(in, line))
        throw ParseError(frame, "atom-count mismatch: header says " + std::to_string(n_atoms) + ", found " +
                                    std::to_string(a) + " atom lines");
      const auto toks = split_ws(line);
      if (toks.size() != width)
        throw ParseError(frame, "atom line " + std::to_string(a) + " has " + std::to_string(toks.size()) +
                                    " fields, expected " + std::to_string(width));
      c.species.emplace_back(toks[*species_col]);
      Vec3 p{};
      for (std::size_t k = 0; k < 3; ++k) p[k] = to_double(toks[*pos_col + k], frame, "position");
      c.positions.push_back(p);
      if (force_col) {
        Vec3 f{};
        for (std::size_t k = 0; k < 3; ++k) f[k] = to_double(toks[*force_col + k], frame, "force");
        c.forces->push_back(f);
      }
    }
    try {
      c.validate();
    } catch (const InvalidArgument& e) {
      throw ParseError(frame, e.what());
    }
    frames.push_back(std::move(c));
    ++frame;
  }
  if (frames.empty()) throw ParseError(0, "no frames in input");
  return Dataset(name, std::move(frames));
}

Dataset parse_extxyz_string(std::string_view text, const std::string& name) {
  std::istringstream in{std::string(text)};
  return parse_extxyz(in, name);
}

Dataset read_extxyz_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_extxyz(in, std::filesystem::path(path).stem().string());
}

void write_extxyz(std::ostream& out, const Dataset& d) {
  for (const auto& c : d) {
    out << c.size() << '\n';
    if (c.cell) {
      out << "Lattice=\"";
      for (std::size_t i = 0; i < 9; ++i) out << (i ? " " : "") << format_double(c.cell->vectors[i / 3][i % 3]);
      out << "\" ";
    }
    out << "Properties=species:S:1:pos:R:3" << (c.forces ? ":forces:R:3" : "");
    if (c.energy) out << " energy=" << format_double(*c.energy);
    if (c.temperature_tag) out << " temperature=" << format_double(*c.temperature_tag);
    if (c.cell) {
      const auto& p = c.cell->periodic;
      out << " pbc=\"" << (p[0] ? 'T' : 'F') << ' ' << (p[1] ? 'T' : 'F') << ' ' << (p[2] ? 'T' : 'F') << '"';
    }
    out << '\n';
    for (std::size_t a = 0; a < c.size(); ++a) {
      out << c.species[a];
      for (double x : c.positions[a]) out << ' ' << format_double(x);
      if (c.forces)
        for (double x : (*c.forces)[a]) out << ' ' << format_double(x);
      out << '\n';
    }
  }
}

std::string write_extxyz_string(const Dataset& d) {
  std::ostringstream out;
  write_extxyz(out, d);
  return out.str();
}

void write_extxyz_file(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_extxyz(out, d);
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace nnipls
