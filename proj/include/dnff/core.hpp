#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dnff/errors.hpp"

namespace dnff {

using Vec3 = Eigen::Vector3d;
using Vec3List = std::vector<Vec3>;
using Species = std::uint8_t;

// Orthorhombic periodic cell in reduced length units.
class SimulationBox {
 public:
  SimulationBox() : SimulationBox(Vec3(1.0, 1.0, 1.0)) {}
  explicit SimulationBox(const Vec3& lengths);
  static SimulationBox cubic(double length) { return SimulationBox(Vec3::Constant(length)); }

  const Vec3& lengths() const { return lengths_; }
  double length(int axis) const { return lengths_[axis]; }
  double min_length() const { return lengths_.minCoeff(); }
  double volume() const { return lengths_.prod(); }
  // Always true: every axis is periodic in this library.
  std::array<bool, 3> periodic() const { return {true, true, true}; }

  bool operator==(const SimulationBox& other) const { return lengths_ == other.lengths_; }

 private:
  Vec3 lengths_;
};

// Species names indexed by species id, e.g. {"Li", "Cl"}.
using SpeciesTable = std::vector<std::string>;

struct Configuration {
  std::vector<Species> species;
  Vec3List positions;
  SimulationBox box;
  SpeciesTable names;

  std::size_t size() const { return positions.size(); }
  // Throws InvalidInput if shapes disagree, positions are non-finite, or a
  // species id has no name.
  void validate() const;
};

enum class LabelKind { Force, NegNoise };

const char* to_string(LabelKind kind);
LabelKind label_kind_from_string(const std::string& text);

struct LabeledFrame {
  Configuration config;
  Vec3List labels;
  LabelKind kind = LabelKind::Force;
  double sigma = 0.0;

  void validate() const;
};

// Displacement rj - ri mapped to the nearest periodic image, each component in [-L/2, L/2).
Vec3 minimum_image(const Vec3& ri, const Vec3& rj, const SimulationBox& box);

// Maps one coordinate into [0, L).
double wrap_coordinate(double x, double length);
Configuration wrap(Configuration config);

// Cubic lattice placement with species assigned in alternating blocks of
// counts[s]; the lattice holds ceil(N^(1/3))^3 sites and is filled in order.
Configuration lattice_configuration(const std::vector<std::size_t>& counts, double box_length,
                                    const SpeciesTable& names);

// Looks up a species id by name.
Species species_id(const SpeciesTable& names, const std::string& name);

}  // namespace dnff
