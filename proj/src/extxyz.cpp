#include "dnff/extxyz.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace dnff {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_extxyz(std::ostream& out, const LabeledFrame& frame) {
  frame.validate();
  const auto& c = frame.config;
  const auto& L = c.box.lengths();
  out << c.size() << '\n';
  out << "Lattice=\"" << format_double(L[0]) << " 0 0 0 " << format_double(L[1]) << " 0 0 0 "
      << format_double(L[2]) << "\" Properties=" << kExtxyzProperties
      << " label_kind=" << to_string(frame.kind) << " sigma=" << format_double(frame.sigma)
      << '\n';
  for (std::size_t i = 0; i < c.size(); ++i) {
    out << c.names[c.species[i]];
    for (int a = 0; a < 3; ++a) out << ' ' << format_double(c.positions[i][a]);
    for (int a = 0; a < 3; ++a) out << ' ' << format_double(frame.labels[i][a]);
    out << '\n';
  }
}

void write_extxyz(std::ostream& out, const std::vector<LabeledFrame>& frames) {
  for (const auto& f : frames) write_extxyz(out, f);
}

void write_extxyz_file(const std::filesystem::path& path, const std::vector<LabeledFrame>& frames) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  write_extxyz(out, frames);
  if (!out) throw InvalidInput("write failed for '" + path.string() + "'");
}

namespace {

std::map<std::string, std::string> parse_comment_line(const std::string& line) {
  std::map<std::string, std::string> fields;
  std::size_t i = 0;
  const std::size_t n = line.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= n) break;
    const std::size_t key_start = i;
    while (i < n && line[i] != '=' && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::string key = line.substr(key_start, i - key_start);
    if (i >= n || line[i] != '=') throw InvalidInput("extxyz: malformed header token '" + key + "'");
    ++i;
    std::string value;
    if (i < n && line[i] == '"') {
      const std::size_t close = line.find('"', i + 1);
      if (close == std::string::npos) throw InvalidInput("extxyz: unterminated quote in header");
      value = line.substr(i + 1, close - i - 1);
      i = close + 1;
    } else {
      const std::size_t value_start = i;
      while (i < n && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      value = line.substr(value_start, i - value_start);
    }
    fields[key] = value;
  }
  return fields;
}

double parse_double(const std::string& token, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size()) throw InvalidInput(std::string("extxyz: bad ") + what + " '" + token + "'");
  return v;
}

}  // namespace

std::vector<LabeledFrame> read_extxyz(std::istream& in, SpeciesTable names) {
  std::vector<LabeledFrame> frames;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::size_t count = 0;
    try {
      std::size_t used = 0;
      long long parsed = std::stoll(line, &used);
      if (parsed < 0 || line.find_first_not_of(" \t\r", used) != std::string::npos) throw 0;
      count = static_cast<std::size_t>(parsed);
    } catch (...) {
      throw InvalidInput("extxyz: expected particle count at line " + std::to_string(line_no));
    }

    if (!std::getline(in, line)) throw InvalidInput("extxyz: missing header line");
    ++line_no;
    auto fields = parse_comment_line(line);
    for (const char* key : {"Lattice", "Properties", "label_kind", "sigma"}) {
      if (!fields.count(key)) {
        throw InvalidInput(std::string("extxyz: header missing '") + key + "' at line " +
                           std::to_string(line_no));
      }
    }
    if (fields["Properties"] != kExtxyzProperties) {
      throw InvalidInput("extxyz: unsupported Properties '" + fields["Properties"] + "'");
    }
    std::istringstream lat(fields["Lattice"]);
    double m[9];
    for (double& v : m) {
      std::string tok;
      if (!(lat >> tok)) throw InvalidInput("extxyz: Lattice needs 9 numbers");
      v = parse_double(tok, "lattice entry");
    }
    if (m[1] != 0 || m[2] != 0 || m[3] != 0 || m[5] != 0 || m[6] != 0 || m[7] != 0) {
      throw InvalidInput("extxyz: only orthorhombic lattices are supported");
    }

    LabeledFrame frame;
    frame.kind = label_kind_from_string(fields["label_kind"]);
    frame.sigma = parse_double(fields["sigma"], "sigma");
    frame.config.box = SimulationBox(Vec3(m[0], m[4], m[8]));
    frame.config.species.reserve(count);
    frame.config.positions.reserve(count);
    frame.labels.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::getline(in, line)) throw InvalidInput("extxyz: truncated frame");
      ++line_no;
      std::istringstream row(line);
      std::string name;
      std::string tok[6];
      if (!(row >> name >> tok[0] >> tok[1] >> tok[2] >> tok[3] >> tok[4] >> tok[5])) {
        throw InvalidInput("extxyz: malformed particle row at line " + std::to_string(line_no));
      }
      auto it = std::find(names.begin(), names.end(), name);
      if (it == names.end()) {
        names.push_back(name);
        it = names.end() - 1;
      }
      frame.config.species.push_back(static_cast<Species>(it - names.begin()));
      frame.config.positions.emplace_back(parse_double(tok[0], "x"), parse_double(tok[1], "y"),
                                          parse_double(tok[2], "z"));
      frame.labels.emplace_back(parse_double(tok[3], "label"), parse_double(tok[4], "label"),
                                parse_double(tok[5], "label"));
    }
    frames.push_back(std::move(frame));
  }
  for (auto& f : frames) {
    f.config.names = names;
    f.validate();
  }
  return frames;
}

std::vector<LabeledFrame> read_extxyz_file(const std::filesystem::path& path, SpeciesTable names) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  try {
    return read_extxyz(in, std::move(names));
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

}  // namespace dnff
