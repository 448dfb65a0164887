#include "dnff/core.hpp"

#include <algorithm>
#include <cmath>

namespace dnff {

SimulationBox::SimulationBox(const Vec3& lengths) : lengths_(lengths) {
  for (int a = 0; a < 3; ++a) {
    if (!std::isfinite(lengths[a]) || lengths[a] <= 0.0) {
      throw InvalidInput("box lengths must be finite and strictly positive");
    }
  }
}

void Configuration::validate() const {
  if (species.size() != positions.size()) {
    throw InvalidInput("species list length (" + std::to_string(species.size()) +
                       ") differs from position count (" + std::to_string(positions.size()) + ")");
  }
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!positions[i].allFinite()) {
      throw InvalidInput("non-finite position for particle " + std::to_string(i));
    }
    if (species[i] >= names.size()) {
      throw InvalidInput("species id " + std::to_string(species[i]) + " has no name");
    }
  }
}

const char* to_string(LabelKind kind) {
  return kind == LabelKind::Force ? "force" : "neg_noise";
}

LabelKind label_kind_from_string(const std::string& text) {
  if (text == "force") return LabelKind::Force;
  if (text == "neg_noise") return LabelKind::NegNoise;
  throw InvalidInput("unknown label_kind '" + text + "'");
}

void LabeledFrame::validate() const {
  config.validate();
  if (labels.size() != config.size()) {
    throw InvalidInput("label count does not match particle count");
  }
  const bool noisy = kind == LabelKind::NegNoise;
  if (noisy != (sigma > 0.0)) {
    throw InvalidInput("sigma must be positive exactly when label_kind is neg_noise");
  }
}

Vec3 minimum_image(const Vec3& ri, const Vec3& rj, const SimulationBox& box) {
  if (!ri.allFinite() || !rj.allFinite()) {
    throw InvalidInput("minimum_image: non-finite coordinate");
  }
  Vec3 d = rj - ri;
  for (int a = 0; a < 3; ++a) {
    const double length = box.length(a);
    d[a] -= length * std::floor(d[a] / length + 0.5);
  }
  return d;
}

double wrap_coordinate(double x, double length) {
  if (x >= 0.0 && x < length) return x;
  double r = std::fmod(x, length);
  if (r < 0.0) r += length;
  if (r >= length) r = 0.0;
  return r;
}

Configuration wrap(Configuration config) {
  for (std::size_t i = 0; i < config.positions.size(); ++i) {
    auto& p = config.positions[i];
    if (!p.allFinite()) {
      throw InvalidInput("wrap: non-finite position for particle " + std::to_string(i));
    }
    for (int a = 0; a < 3; ++a) p[a] = wrap_coordinate(p[a], config.box.length(a));
  }
  return config;
}

Configuration lattice_configuration(const std::vector<std::size_t>& counts, double box_length,
                                    const SpeciesTable& names) {
  if (counts.size() != names.size() || counts.empty()) {
    throw InvalidInput("lattice_configuration: one count per species name required");
  }
  std::size_t total = 0;
  for (auto c : counts) total += c;
  if (total == 0) throw InvalidInput("lattice_configuration: no particles");

  auto per_side = static_cast<std::size_t>(std::ceil(std::cbrt(static_cast<double>(total))));
  while (per_side * per_side * per_side < total) ++per_side;
  const double spacing = box_length / static_cast<double>(per_side);

  Configuration config;
  config.box = SimulationBox::cubic(box_length);
  config.names = names;
  std::vector<std::size_t> remaining = counts;
  const std::size_t n_species = counts.size();
  for (std::size_t iz = 0; iz < per_side && config.size() < total; ++iz) {
    for (std::size_t iy = 0; iy < per_side && config.size() < total; ++iy) {
      for (std::size_t ix = 0; ix < per_side && config.size() < total; ++ix) {
        std::size_t s = (ix + iy + iz) % n_species;
        while (remaining[s] == 0) s = (s + 1) % n_species;
        --remaining[s];
        config.species.push_back(static_cast<Species>(s));
        config.positions.emplace_back((ix + 0.5) * spacing, (iy + 0.5) * spacing,
                                      (iz + 0.5) * spacing);
      }
    }
  }
  return config;
}

Species species_id(const SpeciesTable& names, const std::string& name) {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InvalidInput("unknown species '" + name + "'");
  return static_cast<Species>(it - names.begin());
}

}  // namespace dnff
