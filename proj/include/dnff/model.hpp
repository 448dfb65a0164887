#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "dnff/core.hpp"
#include "dnff/rng.hpp"

namespace dnff {

struct ModelHyper {
  std::size_t n_rbf = 16;
  double r_cut = 4.0;
  std::size_t n_species = 2;
  std::vector<std::size_t> hidden_sizes{64, 64};
  // activation is always tanh

  void validate() const;
  bool operator==(const ModelHyper&) const = default;
};

// Where one dense layer of one species-pair MLP lives in the flat parameter vector.
struct LayerSlot {
  std::size_t rows = 0;  // outputs
  std::size_t cols = 0;  // inputs
  std::size_t weight_offset = 0;  // rows x cols, row-major
  std::size_t bias_offset = 0;
};

// Pairwise scalar-message force model: for every pair closer than r_cut,
// a species-pair MLP maps radial-basis features of the distance to a scalar
// phi, and particle i receives phi * (r_j - r_i) / d_ij. The (a, b) and (b, a)
// networks share one parameter block.
class ModelParameters {
 public:
  ModelParameters() = default;
  ModelParameters(ModelHyper hyper, SpeciesTable species);

  // Xavier-uniform weights and zero biases drawn from (seed, init stream).
  static ModelParameters xavier(ModelHyper hyper, SpeciesTable species, std::uint64_t seed);

  const ModelHyper& hyper() const { return hyper_; }
  const SpeciesTable& species() const { return species_; }
  std::size_t n_pairs() const;
  std::size_t block_size() const { return block_size_; }
  const std::vector<LayerSlot>& layers() const { return layers_; }
  // Offset of the parameter block for the unordered species pair (a, b).
  std::size_t block_offset(Species a, Species b) const;
  std::size_t block_offset(std::size_t pair) const { return pair * block_size_; }

  const std::vector<double>& rbf_centers() const { return centers_; }
  double rbf_width() const { return width_; }

  Eigen::VectorXd& values() { return theta_; }
  const Eigen::VectorXd& values() const { return theta_; }
  std::size_t size() const { return static_cast<std::size_t>(theta_.size()); }

  // Noise level the model was trained at (0 for force-trained models).
  double training_sigma = 0.0;
  double best_validation_loss = 0.0;

  void validate() const;

 private:
  ModelHyper hyper_;
  SpeciesTable species_;
  std::vector<LayerSlot> layers_;
  std::size_t block_size_ = 0;
  std::vector<double> centers_;
  double width_ = 0.0;
  Eigen::VectorXd theta_;
};

double cosine_cutoff(double d, double r_cut);

// exp(-(d - c_m)^2 / (2 w^2)) * f_cut(d), with centers evenly spaced on
// [0, r_cut] and w equal to their spacing.
Eigen::VectorXd featurize_pair(double d, const ModelHyper& hyper);

// Scalar message phi for one species pair at distance d (no cutoff test).
double pair_message(const ModelParameters& params, Species a, Species b, double d);

// Messages for many distances of one species pair at once.
Eigen::VectorXd pair_messages(const ModelParameters& params, Species a, Species b,
                              const Eigen::VectorXd& distances);

Vec3List predict_forces(const ModelParameters& params, const Configuration& config);

// Mean over all 3N components of the squared difference.
double loss_mse(const Vec3List& pred, const Vec3List& target);

struct BatchGradient {
  double loss = 0.0;  // loss_mse pooled over every component in the batch
  Eigen::VectorXd grad;
};

// Exact gradient of the pooled batch loss with respect to every parameter.
BatchGradient gradient(const ModelParameters& params, const std::vector<LabeledFrame>& frames,
                       const std::vector<std::size_t>& batch);
BatchGradient gradient(const ModelParameters& params, const std::vector<LabeledFrame>& frames);

// Pooled loss without the backward pass.
double dataset_loss(const ModelParameters& params, const std::vector<LabeledFrame>& frames,
                    const std::vector<std::size_t>& subset);

struct TrainConfig {
  std::size_t batch_size = 8;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 400;
  std::uint64_t seed = 1;
  double validation_fraction = 0.1;

  void validate() const;
};

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long t = 0;

  static AdamState zeros(std::size_t n);
};

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state,
               const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double validation_loss = 0.0;  // NaN when there is no validation split
};

struct TrainResult {
  ModelParameters params;  // snapshot from the epoch with the best validation loss
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  std::size_t optimizer_steps = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Minibatch Adam on loss_mse. All frames must share label kind and sigma.
// Throws InvalidDataset for mixed labels and DivergenceError on a non-finite loss.
TrainResult train(const std::vector<LabeledFrame>& dataset, const ModelHyper& hyper,
                  const TrainConfig& config, const EpochCallback& on_epoch = {});

// Same, continuing from given initial parameters.
TrainResult train_from(ModelParameters init, const std::vector<LabeledFrame>& dataset,
                       const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace dnff
