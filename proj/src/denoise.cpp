#include "dnff/denoise.hpp"

#include <cmath>
#include <limits>

#include "dnff/parallel.hpp"
#include "dnff/potentials.hpp"

namespace dnff {

void NoiseSpec::validate() const {
  if (!(sigma > 0.0) || duplicates < 1) {
    throw InvalidArgument("noise: need sigma > 0 and duplicates >= 1");
  }
}

LabeledFrame noise_frame(const LabeledFrame& frame, double sigma, RngStream& rng) {
  if (!(sigma >= 0.0)) throw InvalidArgument("noise_frame: sigma must be >= 0");
  if (sigma > kMaxSigmaFraction * frame.config.box.min_length()) {
    throw InvalidArgument("noise_frame: sigma " + std::to_string(sigma) +
                          " exceeds 1/20 of the smallest box length");
  }
  LabeledFrame out;
  out.config = frame.config;
  out.labels.resize(frame.config.size());
  for (std::size_t i = 0; i < frame.config.size(); ++i) {
    Vec3 noise;
    for (int a = 0; a < 3; ++a) noise[a] = sigma * rng.normal();
    out.config.positions[i] += noise;
    out.labels[i] = -noise;
  }
  out.config = wrap(std::move(out.config));
  out.kind = sigma > 0.0 ? LabelKind::NegNoise : LabelKind::Force;
  out.sigma = sigma;
  return out;
}

std::uint64_t noise_stream(std::size_t frame_index, std::size_t duplicate) {
  return derive_stream({streams::kNoise, frame_index, duplicate});
}

std::vector<LabeledFrame> build_dataset(const std::vector<LabeledFrame>& frames,
                                        const NoiseSpec& spec) {
  spec.validate();
  if (frames.empty()) throw InvalidArgument("build_dataset: no input frames");
  const std::size_t k = spec.duplicates;
  std::vector<LabeledFrame> out(frames.size() * k);
  parallel_for(out.size(), [&](std::size_t slot) {
    const std::size_t i = slot / k;
    const std::size_t j = slot % k;
    RngStream rng(spec.seed, noise_stream(i, j));
    out[slot] = noise_frame(frames[i], spec.sigma, rng);
  });
  return out;
}

ScaledModelProvider::ScaledModelProvider(ModelParameters params, double sigma)
    : params_(std::move(params)) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("rescale_to_force_field: sigma must be > 0");
  }
  scale_ = 1.0 / (sigma * sigma);
}

EnergyForces ScaledModelProvider::evaluate(const Configuration& config) const {
  EnergyForces out;
  out.energy = std::numeric_limits<double>::quiet_NaN();
  out.forces = predict_forces(params_, config);
  for (auto& f : out.forces) f *= scale_;
  return out;
}

std::unique_ptr<ScaledModelProvider> rescale_to_force_field(const ModelParameters& model,
                                                            double sigma) {
  return std::make_unique<ScaledModelProvider>(model, sigma);
}

TabulatedModelProvider::TabulatedModelProvider(const ModelParameters& params, double scale,
                                               std::size_t points)
    : n_species_(params.hyper().n_species), r_cut_(params.hyper().r_cut) {
  if (points < 2) throw InvalidArgument("tabulation needs at least 2 points");
  spacing_ = r_cut_ / static_cast<double>(points - 1);
  Eigen::VectorXd grid(static_cast<Eigen::Index>(points));
  for (std::size_t k = 0; k < points; ++k) grid[static_cast<Eigen::Index>(k)] = k * spacing_;
  tables_.resize(pair_count(n_species_));
  for (Species a = 0; a < n_species_; ++a) {
    for (Species b = a; b < n_species_; ++b) {
      const Eigen::VectorXd phi = pair_messages(params, a, b, grid) * scale;
      tables_[pair_index(a, b, n_species_)].assign(phi.data(), phi.data() + phi.size());
    }
  }
}

double TabulatedModelProvider::message(Species a, Species b, double d) const {
  const auto& t = tables_[pair_index(a, b, n_species_)];
  const double x = d / spacing_;
  const auto k = std::min(t.size() - 2, static_cast<std::size_t>(x));
  const double frac = x - static_cast<double>(k);
  return t[k] + frac * (t[k + 1] - t[k]);
}

EnergyForces TabulatedModelProvider::evaluate(const Configuration& config) const {
  EnergyForces out;
  out.energy = std::numeric_limits<double>::quiet_NaN();
  out.forces.assign(config.size(), Vec3::Zero());
  const double rc2 = r_cut_ * r_cut_;
  for (std::size_t i = 0; i < config.size(); ++i) {
    for (std::size_t j = i + 1; j < config.size(); ++j) {
      const Vec3 d = minimum_image(config.positions[i], config.positions[j], config.box);
      const double r2 = d.squaredNorm();
      if (r2 >= rc2) continue;
      const double r = std::sqrt(r2);
      if (r < kOverlapFloor) throw OverlapError(i, j, r);
      const Vec3 f = (message(config.species[i], config.species[j], r) / r) * d;
      out.forces[i] += f;
      out.forces[j] -= f;
    }
  }
  return out;
}

}  // namespace dnff
