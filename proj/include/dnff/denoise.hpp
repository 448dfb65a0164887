#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dnff/core.hpp"
#include "dnff/model.hpp"
#include "dnff/rng.hpp"
#include "dnff/sampler.hpp"

namespace dnff {

struct NoiseSpec {
  double sigma = 0.1;
  std::size_t duplicates = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

// Noise is rejected above this fraction of the smallest box length so the raw
// displacement and its minimum image cannot disagree.
inline constexpr double kMaxSigmaFraction = 1.0 / 20.0;

// Adds N ~ normal(0, sigma^2) per coordinate; positions are wrapped, labels are
// the raw -N.
LabeledFrame noise_frame(const LabeledFrame& frame, double sigma, RngStream& rng);

// Stream id for draw `duplicate` of frame `frame_index`.
std::uint64_t noise_stream(std::size_t frame_index, std::size_t duplicate);

// k independent noise draws per frame, ordered frame by frame.
std::vector<LabeledFrame> build_dataset(const std::vector<LabeledFrame>& frames,
                                        const NoiseSpec& spec);

// Model output divided by sigma^2.
class ScaledModelProvider final : public ForceProvider {
 public:
  ScaledModelProvider(ModelParameters params, double sigma);
  EnergyForces evaluate(const Configuration& config) const override;
  double scale() const { return scale_; }
  const ModelParameters& model() const { return params_; }

 private:
  ModelParameters params_;
  double scale_;
};

std::unique_ptr<ScaledModelProvider> rescale_to_force_field(const ModelParameters& model,
                                                            double sigma);

// Same forces as ScaledModelProvider with phi(d) / sigma^2 precomputed on a
// uniform grid and linearly interpolated. Used for long MD runs with a trained
// model; the grid spacing bounds the interpolation error by h^2 |phi''| / 8.
class TabulatedModelProvider final : public ForceProvider {
 public:
  TabulatedModelProvider(const ModelParameters& params, double scale, std::size_t points = 40001);
  EnergyForces evaluate(const Configuration& config) const override;
  double message(Species a, Species b, double d) const;

 private:
  std::size_t n_species_;
  double r_cut_;
  double spacing_;
  std::vector<std::vector<double>> tables_;
};

}  // namespace dnff
