#include "dnff/potentials.hpp"

#include <algorithm>
#include <cmath>

namespace dnff {

std::size_t pair_count(std::size_t n_species) { return n_species * (n_species + 1) / 2; }

std::size_t pair_index(Species a, Species b, std::size_t n_species) {
  std::size_t lo = std::min(a, b);
  std::size_t hi = std::max(a, b);
  // rows 0..lo-1 contribute (n - row) entries each
  return lo * n_species - lo * (lo - 1) / 2 + (hi - lo);
}

PairPotential::PairPotential(std::size_t n_species, std::vector<PairParams> pair_params)
    : n_species_(n_species), params_(std::move(pair_params)) {
  if (params_.size() != pair_count(n_species_)) {
    throw InvalidInput("PairPotential: expected " + std::to_string(pair_count(n_species_)) +
                       " species-pair parameter sets, got " + std::to_string(params_.size()));
  }
  for (const auto& p : params_) {
    if (!(p.lj_sigma > 0.0) || !(p.cutoff > 0.0) || !(p.kappa >= 0.0) ||
        !std::isfinite(p.epsilon) || !std::isfinite(p.charge_product)) {
      throw InvalidInput("PairPotential: require lj_sigma > 0, cutoff > 0, kappa >= 0");
    }
  }
  shifts_.resize(params_.size());
  for (Species a = 0; a < n_species_; ++a) {
    for (Species b = a; b < n_species_; ++b) {
      shifts_[pair_index(a, b, n_species_)] = raw(a, b, params(a, b).cutoff).first;
    }
  }
}

PairPotential PairPotential::toy_licl() {
  PairParams li_li{1.0, 1.0, +1.0, 1.0, 4.0};
  PairParams li_cl{1.0, 1.2, -1.0, 1.0, 4.0};
  PairParams cl_cl{1.0, 1.4, +1.0, 1.0, 4.0};
  return PairPotential(2, {li_li, li_cl, cl_cl});
}

double PairPotential::max_cutoff() const {
  double c = 0.0;
  for (const auto& p : params_) c = std::max(c, p.cutoff);
  return c;
}

std::pair<double, double> PairPotential::raw(Species a, Species b, double r) const {
  const auto& p = params(a, b);
  const double sr2 = (p.lj_sigma / r) * (p.lj_sigma / r);
  const double sr6 = sr2 * sr2 * sr2;
  const double sr12 = sr6 * sr6;
  const double screen = p.charge_product * std::exp(-p.kappa * r) / r;
  const double energy = 4.0 * p.epsilon * (sr12 - sr6) + screen;
  const double radial = 24.0 * p.epsilon * (2.0 * sr12 - sr6) / r + screen * (p.kappa + 1.0 / r);
  return {energy, radial};
}

PairResult pair_energy_force(const PairPotential& pot, Species a, Species b, const Vec3& d) {
  const double r = d.norm();
  if (!(r >= kOverlapFloor)) throw OverlapError(0, 1, r);
  const auto& p = pot.params(a, b);
  if (r >= p.cutoff) return {};
  auto [energy, radial] = pot.raw(a, b, r);
  PairResult out;
  out.energy = energy - pot.shift(a, b);
  out.force_on_j = (radial / r) * d;
  return out;
}

EnergyForces total_forces(const Configuration& config, const PairPotential& pot) {
  const std::size_t n = config.size();
  if (pot.max_cutoff() > 0.5 * config.box.min_length()) {
    throw InvalidInput("potential cutoff exceeds half the smallest box length");
  }
  EnergyForces out;
  out.forces.assign(n, Vec3::Zero());
  const auto& pos = config.positions;
  for (std::size_t i = 0; i < n; ++i) {
    const Species si = config.species[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      const Species sj = config.species[j];
      const Vec3 d = minimum_image(pos[i], pos[j], config.box);
      const double r2 = d.squaredNorm();
      const auto& p = pot.params(si, sj);
      if (r2 >= p.cutoff * p.cutoff) continue;
      const double r = std::sqrt(r2);
      if (r < kOverlapFloor) throw OverlapError(i, j, r);
      auto [energy, radial] = pot.raw(si, sj, r);
      out.energy += energy - pot.shift(si, sj);
      const Vec3 f = (radial / r) * d;
      out.forces[j] += f;
      out.forces[i] -= f;
    }
  }
  return out;
}

}  // namespace dnff
