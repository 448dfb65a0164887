#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dnff/core.hpp"
#include "dnff/density.hpp"
#include "dnff/potentials.hpp"
#include "dnff/rng.hpp"

namespace dnff {

struct SamplerParams {
  double timestep = 0.005;
  double friction = 1.0;
  double temperature = 1.0;  // k_B = 1, so beta = 1 / temperature
  long n_steps = 180000;
  long n_equilibration = 20000;
  long dump_interval = 50;
  std::uint64_t seed = 1;
  std::uint64_t stream_id = streams::kSampler;

  void validate() const;
};

// Anything that maps a configuration to per-particle forces. Energy is NaN
// when the provider has none (learned force fields).
class ForceProvider {
 public:
  virtual ~ForceProvider() = default;
  virtual EnergyForces evaluate(const Configuration& config) const = 0;
};

class PotentialProvider final : public ForceProvider {
 public:
  explicit PotentialProvider(PairPotential pot) : pot_(std::move(pot)) {}
  EnergyForces evaluate(const Configuration& config) const override {
    return total_forces(config, pot_);
  }
  const PairPotential& potential() const { return pot_; }

 private:
  PairPotential pot_;
};

// Positions, velocities and the forces at the current positions. Unit masses.
struct MdState {
  Configuration config;
  Vec3List velocities;
  Vec3List forces;
};

MdState make_state(Configuration config, const ForceProvider& provider);

// One BAOAB step (kick, drift, Ornstein-Uhlenbeck, drift, kick) followed by
// wrapping. `state.forces` must hold the forces at `state.config` on entry and
// is refreshed on exit. Throws DivergenceError carrying `step_index` if the new
// forces are not finite.
void langevin_step(MdState& state, const ForceProvider& provider, const SamplerParams& params,
                   RngStream& rng, long step_index = 0);

// Convenience form that evaluates the entry forces itself.
std::pair<Configuration, Vec3List> langevin_step(const Configuration& config,
                                                 const Vec3List& velocities,
                                                 const ForceProvider& provider,
                                                 const SamplerParams& params, RngStream& rng);

using ProgressFn = std::function<void(long step, long total)>;

// Draws Maxwell-Boltzmann velocities, runs n_steps, and appends one
// force-labelled frame every dump_interval steps after equilibration. Frames
// already produced stay in `out` if a DivergenceError escapes.
void run_trajectory(const Configuration& config0, const ForceProvider& provider,
                    const SamplerParams& params, std::vector<LabeledFrame>& out,
                    const ProgressFn& progress = {});

std::vector<LabeledFrame> run_trajectory(const Configuration& config0,
                                         const ForceProvider& provider,
                                         const SamplerParams& params,
                                         const ProgressFn& progress = {});

// Metropolis chain targeting rho at unit temperature; keeps every `thin`-th
// state after `burn_in` steps.
std::vector<double> mc_sample_1d(const AnalyticDensity1D& density, std::size_t n_samples,
                                 double step_width, RngStream& rng, std::size_t thin = 10,
                                 std::size_t burn_in = 2000);

}  // namespace dnff
