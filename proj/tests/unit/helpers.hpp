#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "dnff/core.hpp"
#include "dnff/rng.hpp"

namespace testing {

using namespace dnff;

// Uniform positions with every minimum-image distance above `min_dist`.
inline Configuration random_configuration(std::size_t n, double box_length, double min_dist,
                                          std::uint64_t seed, std::size_t n_species = 2) {
  RngStream rng(seed, 77);
  Configuration c;
  c.box = SimulationBox::cubic(box_length);
  c.names = n_species == 1 ? SpeciesTable{"A"} : SpeciesTable{"Li", "Cl"};
  while (c.positions.size() < n) {
    Vec3 p(rng.uniform() * box_length, rng.uniform() * box_length, rng.uniform() * box_length);
    bool ok = true;
    for (const auto& q : c.positions) {
      if (minimum_image(q, p, c.box).norm() < min_dist) ok = false;
    }
    if (!ok) continue;
    c.positions.push_back(p);
    c.species.push_back(static_cast<Species>(c.positions.size() % n_species));
  }
  return c;
}

// A cluster of n particles around the middle of a large box, so minimum-image
// and direct displacements coincide and rigid rotations about the centre are exact symmetries.
inline Configuration clustered_configuration(std::size_t n, std::uint64_t seed) {
  const double box = 100.0;
  RngStream rng(seed, 78);
  Configuration c;
  c.box = SimulationBox::cubic(box);
  c.names = {"Li", "Cl"};
  while (c.positions.size() < n) {
    Vec3 p(rng.uniform(), rng.uniform(), rng.uniform());
    p = Vec3::Constant(box / 2) + 3.0 * (2.0 * p - Vec3::Ones());
    bool ok = true;
    for (const auto& q : c.positions) {
      if ((q - p).norm() < 0.8) ok = false;
    }
    if (!ok) continue;
    c.positions.push_back(p);
    c.species.push_back(static_cast<Species>(c.positions.size() % 2));
  }
  return c;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const char* env = std::getenv("DNFF_TEST_TMP");
  std::filesystem::path base = env ? env : std::filesystem::temp_directory_path() / "dnff_tests";
  auto dir = base / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline double rel_err(double a, double b, double floor = 0.0) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace testing
