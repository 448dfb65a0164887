#include "dnff/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dnff {

void SamplerParams::validate() const {
  if (!(timestep > 0.0) || !(friction > 0.0) || !(temperature >= 0.0) || dump_interval < 1 ||
      n_equilibration < 0 || n_steps < 0) {
    throw InvalidArgument(
        "sampler: need timestep > 0, friction > 0, temperature >= 0, dump_interval >= 1, "
        "n_equilibration >= 0");
  }
  if (n_equilibration > n_steps) {
    throw InvalidArgument("sampler: n_equilibration (" + std::to_string(n_equilibration) +
                          ") exceeds n_steps (" + std::to_string(n_steps) + ")");
  }
}

MdState make_state(Configuration config, const ForceProvider& provider) {
  config.validate();
  MdState state;
  state.velocities.assign(config.size(), Vec3::Zero());
  state.forces = provider.evaluate(config).forces;
  state.config = std::move(config);
  return state;
}

void langevin_step(MdState& state, const ForceProvider& provider, const SamplerParams& params,
                   RngStream& rng, long step_index) {
  const double dt = params.timestep;
  const double half = 0.5 * dt;
  const double decay = std::exp(-params.friction * dt);
  const double kick = std::sqrt(params.temperature * (1.0 - decay * decay));
  auto& pos = state.config.positions;
  auto& vel = state.velocities;
  const std::size_t n = pos.size();

  for (std::size_t i = 0; i < n; ++i) {
    vel[i] += half * state.forces[i];  // B
    pos[i] += half * vel[i];           // A
    for (int a = 0; a < 3; ++a) vel[i][a] = decay * vel[i][a] + kick * rng.normal();  // O
    pos[i] += half * vel[i];  // A
  }
  state.config = wrap(std::move(state.config));

  EnergyForces next = provider.evaluate(state.config);
  for (std::size_t i = 0; i < n; ++i) {
    if (!next.forces[i].allFinite()) {
      throw DivergenceError("non-finite force at step " + std::to_string(step_index), step_index);
    }
    vel[i] += half * next.forces[i];  // B
  }
  state.forces = std::move(next.forces);
}

std::pair<Configuration, Vec3List> langevin_step(const Configuration& config,
                                                 const Vec3List& velocities,
                                                 const ForceProvider& provider,
                                                 const SamplerParams& params, RngStream& rng) {
  if (velocities.size() != config.size()) throw InvalidInput("velocity count mismatch");
  for (const auto& v : velocities) {
    if (!v.allFinite()) throw InvalidInput("non-finite velocity");
  }
  MdState state = make_state(config, provider);
  state.velocities = velocities;
  langevin_step(state, provider, params, rng);
  return {std::move(state.config), std::move(state.velocities)};
}

void run_trajectory(const Configuration& config0, const ForceProvider& provider,
                    const SamplerParams& params, std::vector<LabeledFrame>& out,
                    const ProgressFn& progress) {
  params.validate();
  RngStream rng(params.seed, params.stream_id);
  MdState state = make_state(wrap(config0), provider);
  const double vscale = std::sqrt(params.temperature);
  for (auto& v : state.velocities) {
    for (int a = 0; a < 3; ++a) v[a] = vscale * rng.normal();
  }

  const std::size_t start = out.size();
  const long report_every = std::max<long>(1, params.n_steps / 20);
  for (long step = 1; step <= params.n_steps; ++step) {
    try {
      langevin_step(state, provider, params, rng, step);
    } catch (DivergenceError& e) {
      throw DivergenceError(std::string(e.what()) + " after " +
                                std::to_string(out.size() - start) + " frames",
                            step, out.size() - start);
    } catch (OverlapError& e) {
      throw DivergenceError(std::string(e.what()) + " at step " + std::to_string(step) +
                                " after " + std::to_string(out.size() - start) + " frames",
                            step, out.size() - start);
    }
    const long produced = step - params.n_equilibration;
    if (produced > 0 && produced % params.dump_interval == 0) {
      LabeledFrame frame;
      frame.config = state.config;
      frame.labels = state.forces;
      frame.kind = LabelKind::Force;
      frame.sigma = 0.0;
      out.push_back(std::move(frame));
    }
    if (progress && step % report_every == 0) progress(step, params.n_steps);
  }
}

std::vector<LabeledFrame> run_trajectory(const Configuration& config0,
                                         const ForceProvider& provider,
                                         const SamplerParams& params, const ProgressFn& progress) {
  std::vector<LabeledFrame> frames;
  run_trajectory(config0, provider, params, frames, progress);
  return frames;
}

std::vector<double> mc_sample_1d(const AnalyticDensity1D& density, std::size_t n_samples,
                                 double step_width, RngStream& rng, std::size_t thin,
                                 std::size_t burn_in) {
  if (!(step_width > 0.0)) throw InvalidArgument("mc_sample_1d: step_width must be > 0");
  if (thin == 0) thin = 1;
  double x = density.mode();
  double logp = density.log_rho(x);
  auto advance = [&]() {
    const double proposal = x + step_width * (2.0 * rng.uniform() - 1.0);
    const double logq = density.log_rho(proposal);
    if (logq >= logp || rng.uniform() < std::exp(logq - logp)) {
      x = proposal;
      logp = logq;
    }
  };
  for (std::size_t k = 0; k < burn_in; ++k) advance();
  std::vector<double> samples;
  samples.reserve(n_samples);
  while (samples.size() < n_samples) {
    for (std::size_t k = 0; k < thin; ++k) advance();
    samples.push_back(x);
  }
  return samples;
}

}  // namespace dnff
