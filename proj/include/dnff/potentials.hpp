#pragma once

#include <utility>
#include <vector>

#include "dnff/core.hpp"

namespace dnff {

inline constexpr double kOverlapFloor = 1e-6;

// Index of the unordered species pair (a, b) in upper-triangular order:
// (0,0), (0,1), ..., (0,n-1), (1,1), ...
std::size_t pair_index(Species a, Species b, std::size_t n_species);
std::size_t pair_count(std::size_t n_species);

struct PairParams {
  double epsilon = 1.0;         // LJ well depth
  double lj_sigma = 1.0;        // LJ diameter
  double charge_product = 0.0;  // q_a * q_b
  double kappa = 1.0;           // screening inverse length
  double cutoff = 4.0;
};

// Lennard-Jones plus screened Coulomb, truncated and shifted to zero at the cutoff:
//   U(r) = 4 eps [(s/r)^12 - (s/r)^6] + q_a q_b exp(-kappa r) / r - U(r_c)
class PairPotential {
 public:
  PairPotential(std::size_t n_species, std::vector<PairParams> params);

  // Two-species screened ionic system used as ground truth for the pipeline.
  static PairPotential toy_licl();

  std::size_t n_species() const { return n_species_; }
  const PairParams& params(Species a, Species b) const {
    return params_[pair_index(a, b, n_species_)];
  }
  const std::vector<PairParams>& all_params() const { return params_; }
  double max_cutoff() const;
  // Energy offset that makes U(r_c) = 0.
  double shift(Species a, Species b) const { return shifts_[pair_index(a, b, n_species_)]; }

  // Unshifted energy and -dU/dr at distance r (no cutoff applied).
  std::pair<double, double> raw(Species a, Species b, double r) const;

 private:
  std::size_t n_species_;
  std::vector<PairParams> params_;
  std::vector<double> shifts_;
};

struct PairResult {
  double energy = 0.0;
  Vec3 force_on_j = Vec3::Zero();
};

// `d` is the displacement r_j - r_i. Throws OverlapError below kOverlapFloor.
PairResult pair_energy_force(const PairPotential& pot, Species a, Species b, const Vec3& d);

struct EnergyForces {
  double energy = 0.0;
  Vec3List forces;
};

// Minimum-image O(N^2) evaluation. Requires every cutoff <= min box length / 2.
EnergyForces total_forces(const Configuration& config, const PairPotential& pot);

}  // namespace dnff
