#include "dnff/model.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dnff/parallel.hpp"
#include "dnff/potentials.hpp"

namespace dnff {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct PairGeom {
  std::size_t i;
  std::size_t j;
  double d;
  Vec3 u;  // (r_j - r_i) / d
};

// Pairs within the cutoff grouped by unordered species pair.
std::vector<std::vector<PairGeom>> neighbor_pairs(const Configuration& config,
                                                  const ModelHyper& hyper) {
  std::vector<std::vector<PairGeom>> by_type(pair_count(hyper.n_species));
  const double rc2 = hyper.r_cut * hyper.r_cut;
  const auto& pos = config.positions;
  for (std::size_t i = 0; i < config.size(); ++i) {
    for (std::size_t j = i + 1; j < config.size(); ++j) {
      const Vec3 d = minimum_image(pos[i], pos[j], config.box);
      const double r2 = d.squaredNorm();
      if (r2 >= rc2) continue;
      const double r = std::sqrt(r2);
      if (r < kOverlapFloor) throw OverlapError(i, j, r);
      by_type[pair_index(config.species[i], config.species[j], hyper.n_species)].push_back(
          {i, j, r, d / r});
    }
  }
  return by_type;
}

std::vector<double> distances_of(const std::vector<PairGeom>& pairs) {
  std::vector<double> d(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) d[k] = pairs[k].d;
  return d;
}

void tanh_inplace(Eigen::MatrixXd& z) {
  auto e = (2.0 * z.array().max(-20.0).min(20.0)).exp();
  z = ((e - 1.0) / (e + 1.0)).matrix();
}

void fill_features(const ModelParameters& params, const double* distances, std::size_t n,
                   Eigen::MatrixXd& x) {
  const auto& hyper = params.hyper();
  const auto& centers = params.rbf_centers();
  const double inv = 1.0 / (2.0 * params.rbf_width() * params.rbf_width());
  x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(hyper.n_rbf));
  for (std::size_t k = 0; k < n; ++k) {
    const double d = distances[k];
    const double fc = cosine_cutoff(d, hyper.r_cut);
    for (std::size_t m = 0; m < hyper.n_rbf; ++m) {
      const double t = d - centers[m];
      x(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) = std::exp(-t * t * inv) * fc;
    }
  }
}

// Forward pass of one species-pair MLP. acts[0] holds the inputs; the hidden
// activations are appended. Returns phi per row.
Eigen::VectorXd forward(const ModelParameters& params, std::size_t pair,
                        std::vector<Eigen::MatrixXd>& acts) {
  const double* base = params.values().data() + params.block_offset(pair);
  const auto& layers = params.layers();
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const auto& s = layers[l];
    Eigen::Map<const RowMatrix> w(base + s.weight_offset, s.rows, s.cols);
    Eigen::Map<const Eigen::RowVectorXd> b(base + s.bias_offset, s.rows);
    Eigen::MatrixXd z = acts[l] * w.transpose();
    z.rowwise() += b;
    tanh_inplace(z);
    acts.push_back(std::move(z));
  }
  const auto& out = layers.back();
  Eigen::Map<const Eigen::VectorXd> w(base + out.weight_offset, out.cols);
  Eigen::VectorXd phi = acts.back() * w;
  phi.array() += base[out.bias_offset];
  return phi;
}

// Accumulates d(objective)/d(theta) into `grad` given d(objective)/d(phi).
void backward(const ModelParameters& params, std::size_t pair,
              const std::vector<Eigen::MatrixXd>& acts, const Eigen::VectorXd& gphi,
              Eigen::VectorXd& grad) {
  const std::size_t offset = params.block_offset(pair);
  const double* base = params.values().data() + offset;
  double* gbase = grad.data() + offset;
  const auto& layers = params.layers();
  const auto& out = layers.back();

  Eigen::Map<Eigen::VectorXd>(gbase + out.weight_offset, out.cols) += acts.back().transpose() * gphi;
  gbase[out.bias_offset] += gphi.sum();

  Eigen::Map<const Eigen::RowVectorXd> w_out(base + out.weight_offset, out.cols);
  Eigen::MatrixXd g = gphi * w_out;
  g.array() *= 1.0 - acts.back().array().square();
  for (std::size_t l = layers.size() - 1; l-- > 0;) {
    const auto& s = layers[l];
    Eigen::Map<RowMatrix>(gbase + s.weight_offset, s.rows, s.cols) += g.transpose() * acts[l];
    Eigen::Map<Eigen::RowVectorXd>(gbase + s.bias_offset, s.rows) += g.colwise().sum();
    if (l == 0) break;
    Eigen::Map<const RowMatrix> w(base + s.weight_offset, s.rows, s.cols);
    Eigen::MatrixXd next = g * w;
    next.array() *= 1.0 - acts[l].array().square();
    g = std::move(next);
  }
}

void check_species(const ModelParameters& params, const Configuration& config) {
  for (auto s : config.species) {
    if (s >= params.hyper().n_species) {
      throw InvalidInput("configuration species id " + std::to_string(s) +
                         " outside the model's species table");
    }
  }
  if (!config.names.empty() && !params.species().empty()) {
    for (std::size_t s = 0; s < std::min(config.names.size(), params.species().size()); ++s) {
      if (config.names[s] != params.species()[s]) {
        throw InvalidInput("species table mismatch: configuration has '" + config.names[s] +
                           "' where the model has '" + params.species()[s] + "'");
      }
    }
  }
}

struct FrameEval {
  double sse = 0.0;
  Eigen::VectorXd grad;
};

// Sum of squared force errors for one frame, and optionally its gradient.
FrameEval evaluate_frame(const ModelParameters& params, const LabeledFrame& frame,
                         bool with_gradient) {
  check_species(params, frame.config);
  const auto pairs = neighbor_pairs(frame.config, params.hyper());
  const std::size_t n = frame.config.size();
  Vec3List forces(n, Vec3::Zero());
  std::vector<std::vector<Eigen::MatrixXd>> acts(pairs.size());
  std::vector<Eigen::VectorXd> phis(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].empty()) continue;
    acts[p].emplace_back();
    const auto dist = distances_of(pairs[p]);
    fill_features(params, dist.data(), dist.size(), acts[p][0]);
    phis[p] = forward(params, p, acts[p]);
    for (std::size_t k = 0; k < pairs[p].size(); ++k) {
      const auto& g = pairs[p][k];
      const Vec3 f = phis[p][static_cast<Eigen::Index>(k)] * g.u;
      forces[g.i] += f;
      forces[g.j] -= f;
    }
  }
  FrameEval out;
  Vec3List residual(n);
  for (std::size_t i = 0; i < n; ++i) {
    residual[i] = forces[i] - frame.labels[i];
    out.sse += residual[i].squaredNorm();
  }
  if (!with_gradient) return out;
  out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.size()));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].empty()) continue;
    Eigen::VectorXd gphi(static_cast<Eigen::Index>(pairs[p].size()));
    for (std::size_t k = 0; k < pairs[p].size(); ++k) {
      const auto& g = pairs[p][k];
      gphi[static_cast<Eigen::Index>(k)] = 2.0 * (residual[g.i] - residual[g.j]).dot(g.u);
    }
    backward(params, p, acts[p], gphi, out.grad);
  }
  return out;
}

void fisher_yates(std::vector<std::size_t>& v, RngStream& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

void ModelHyper::validate() const {
  if (n_rbf < 2 || !(r_cut > 0.0) || hidden_sizes.empty() || n_species == 0) {
    throw InvalidArgument("model hyper: need n_rbf >= 2, r_cut > 0, non-empty hidden_sizes");
  }
  for (auto h : hidden_sizes) {
    if (h == 0) throw InvalidArgument("model hyper: hidden sizes must be positive");
  }
}

ModelParameters::ModelParameters(ModelHyper hyper, SpeciesTable species)
    : hyper_(std::move(hyper)), species_(std::move(species)) {
  hyper_.validate();
  if (species_.empty()) {
    for (std::size_t s = 0; s < hyper_.n_species; ++s) species_.push_back(std::to_string(s));
  }
  if (species_.size() != hyper_.n_species) {
    throw InvalidArgument("model: species table size differs from n_species");
  }
  std::size_t in = hyper_.n_rbf;
  std::size_t offset = 0;
  auto add_layer = [&](std::size_t rows, std::size_t cols) {
    LayerSlot s{rows, cols, offset, offset + rows * cols};
    offset += rows * cols + rows;
    layers_.push_back(s);
  };
  for (auto h : hyper_.hidden_sizes) {
    add_layer(h, in);
    in = h;
  }
  add_layer(1, in);
  block_size_ = offset;
  theta_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(block_size_ * n_pairs()));

  const double spacing = hyper_.r_cut / static_cast<double>(hyper_.n_rbf - 1);
  for (std::size_t m = 0; m < hyper_.n_rbf; ++m) centers_.push_back(m * spacing);
  width_ = spacing;
}

ModelParameters ModelParameters::xavier(ModelHyper hyper, SpeciesTable species,
                                        std::uint64_t seed) {
  ModelParameters params(std::move(hyper), std::move(species));
  RngStream rng(seed, streams::kInit);
  for (std::size_t p = 0; p < params.n_pairs(); ++p) {
    double* base = params.theta_.data() + params.block_offset(p);
    for (const auto& s : params.layers_) {
      const double limit = std::sqrt(6.0 / static_cast<double>(s.rows + s.cols));
      for (std::size_t k = 0; k < s.rows * s.cols; ++k) {
        base[s.weight_offset + k] = limit * (2.0 * rng.uniform() - 1.0);
      }
    }
  }
  return params;
}

std::size_t ModelParameters::n_pairs() const { return pair_count(hyper_.n_species); }

std::size_t ModelParameters::block_offset(Species a, Species b) const {
  return block_offset(pair_index(a, b, hyper_.n_species));
}

void ModelParameters::validate() const {
  hyper_.validate();
  if (theta_.size() != static_cast<Eigen::Index>(block_size_ * n_pairs())) {
    throw InvalidInput("model: parameter vector size does not match the architecture");
  }
  if (!theta_.allFinite()) throw InvalidInput("model: non-finite parameters");
}

double cosine_cutoff(double d, double r_cut) {
  if (d >= r_cut) return 0.0;
  return 0.5 * (std::cos(std::numbers::pi * d / r_cut) + 1.0);
}

Eigen::VectorXd featurize_pair(double d, const ModelHyper& hyper) {
  ModelParameters layout(hyper, {});
  Eigen::MatrixXd x;
  fill_features(layout, &d, 1, x);
  return x.row(0).transpose();
}

Eigen::VectorXd pair_messages(const ModelParameters& params, Species a, Species b,
                              const Eigen::VectorXd& distances) {
  std::vector<Eigen::MatrixXd> acts(1);
  fill_features(params, distances.data(), static_cast<std::size_t>(distances.size()), acts[0]);
  return forward(params, pair_index(a, b, params.hyper().n_species), acts);
}

double pair_message(const ModelParameters& params, Species a, Species b, double d) {
  Eigen::VectorXd one(1);
  one[0] = d;
  return pair_messages(params, a, b, one)[0];
}

Vec3List predict_forces(const ModelParameters& params, const Configuration& config) {
  check_species(params, config);
  const auto pairs = neighbor_pairs(config, params.hyper());
  Vec3List forces(config.size(), Vec3::Zero());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (pairs[p].empty()) continue;
    std::vector<Eigen::MatrixXd> acts(1);
    const auto dist = distances_of(pairs[p]);
    fill_features(params, dist.data(), dist.size(), acts[0]);
    const Eigen::VectorXd phi = forward(params, p, acts);
    for (std::size_t k = 0; k < pairs[p].size(); ++k) {
      const auto& g = pairs[p][k];
      const Vec3 f = phi[static_cast<Eigen::Index>(k)] * g.u;
      forces[g.i] += f;
      forces[g.j] -= f;
    }
  }
  return forces;
}

double loss_mse(const Vec3List& pred, const Vec3List& target) {
  if (pred.size() != target.size()) {
    throw InvalidInput("loss_mse: shape mismatch (" + std::to_string(pred.size()) + " vs " +
                       std::to_string(target.size()) + " rows)");
  }
  if (pred.empty()) throw InvalidInput("loss_mse: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - target[i]).squaredNorm();
  return sum / (3.0 * static_cast<double>(pred.size()));
}

BatchGradient gradient(const ModelParameters& params, const std::vector<LabeledFrame>& frames,
                       const std::vector<std::size_t>& batch) {
  if (batch.empty()) throw InvalidArgument("gradient: empty batch");
  std::vector<FrameEval> evals(batch.size());
  parallel_for(batch.size(), [&](std::size_t k) {
    evals[k] = evaluate_frame(params, frames.at(batch[k]), true);
  });
  BatchGradient out;
  out.grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(params.size()));
  double components = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    out.loss += evals[k].sse;
    out.grad += evals[k].grad;
    components += 3.0 * static_cast<double>(frames[batch[k]].config.size());
  }
  out.loss /= components;
  out.grad /= components;
  return out;
}

BatchGradient gradient(const ModelParameters& params, const std::vector<LabeledFrame>& frames) {
  std::vector<std::size_t> all(frames.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  return gradient(params, frames, all);
}

double dataset_loss(const ModelParameters& params, const std::vector<LabeledFrame>& frames,
                    const std::vector<std::size_t>& subset) {
  if (subset.empty()) throw InvalidArgument("dataset_loss: empty subset");
  std::vector<double> sse(subset.size());
  parallel_for(subset.size(), [&](std::size_t k) {
    sse[k] = evaluate_frame(params, frames.at(subset[k]), false).sse;
  });
  double total = 0.0;
  double components = 0.0;
  for (std::size_t k = 0; k < subset.size(); ++k) {
    total += sse[k];
    components += 3.0 * static_cast<double>(frames[subset[k]].config.size());
  }
  return total / components;
}

void TrainConfig::validate() const {
  if (batch_size < 1 || !(learning_rate > 0.0) || epochs < 1 || !(validation_fraction >= 0.0) ||
      !(validation_fraction < 1.0) || !(beta1 >= 0.0 && beta1 < 1.0) ||
      !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw InvalidArgument(
        "train config: need batch_size >= 1, learning_rate > 0, epochs >= 1, "
        "validation_fraction in [0, 1)");
  }
}

AdamState AdamState::zeros(std::size_t n) {
  AdamState s;
  s.m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  s.v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  return s;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grads, AdamState& state,
               const TrainConfig& config) {
  if (grads.size() != params.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw InvalidInput("adam_step: size mismatch");
  }
  state.t += 1;
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * grads;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * grads.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(state.t));
  params.array() -= config.learning_rate * (state.m.array() / c1) /
                    ((state.v.array() / c2).sqrt() + config.epsilon);
}

TrainResult train(const std::vector<LabeledFrame>& dataset, const ModelHyper& hyper,
                  const TrainConfig& config, const EpochCallback& on_epoch) {
  if (dataset.empty()) throw InvalidDataset("train: empty dataset");
  return train_from(ModelParameters::xavier(hyper, dataset.front().config.names, config.seed),
                    dataset, config, on_epoch);
}

TrainResult train_from(ModelParameters init, const std::vector<LabeledFrame>& dataset,
                       const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.empty()) throw InvalidDataset("train: empty dataset");
  const LabelKind kind = dataset.front().kind;
  const double sigma = dataset.front().sigma;
  for (std::size_t k = 0; k < dataset.size(); ++k) {
    if (dataset[k].kind != kind || dataset[k].sigma != sigma) {
      throw InvalidDataset("train: frame " + std::to_string(k) +
                           " has a different label kind or sigma than frame 0");
    }
  }

  const std::size_t n = dataset.size();
  std::vector<std::size_t> order(n);
  for (std::size_t k = 0; k < n; ++k) order[k] = k;
  RngStream split_rng(config.seed, streams::kSplit);
  fisher_yates(order, split_rng);
  std::size_t n_val = 0;
  if (config.validation_fraction > 0.0 && n >= 2) {
    n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * n));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  }
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<long>(n_val));
  std::vector<std::size_t> train_idx(order.begin() + static_cast<long>(n_val), order.end());

  TrainResult result;
  ModelParameters params = std::move(init);
  params.training_sigma = kind == LabelKind::NegNoise ? sigma : 0.0;
  AdamState state = AdamState::zeros(params.size());
  double best = std::numeric_limits<double>::infinity();
  result.params = params;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    RngStream shuffle_rng(config.seed, derive_stream({streams::kShuffle, epoch}));
    fisher_yates(train_idx, shuffle_rng);
    double weighted = 0.0;
    double weight = 0.0;
    for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size) {
      const std::size_t stop = std::min(train_idx.size(), start + config.batch_size);
      std::vector<std::size_t> batch(train_idx.begin() + static_cast<long>(start),
                                     train_idx.begin() + static_cast<long>(stop));
      BatchGradient bg = gradient(params, dataset, batch);
      if (!std::isfinite(bg.loss) || !bg.grad.allFinite()) {
        throw DivergenceError("non-finite training loss at epoch " + std::to_string(epoch),
                              static_cast<long>(epoch), epoch - 1);
      }
      double comps = 0.0;
      for (auto k : batch) comps += 3.0 * static_cast<double>(dataset[k].config.size());
      weighted += bg.loss * comps;
      weight += comps;
      adam_step(params.values(), bg.grad, state, config);
      ++result.optimizer_steps;
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = weighted / weight;
    rec.validation_loss = val.empty() ? std::numeric_limits<double>::quiet_NaN()
                                      : dataset_loss(params, dataset, val);
    const double score = val.empty() ? rec.train_loss : rec.validation_loss;
    if (!std::isfinite(score)) {
      throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch),
                            static_cast<long>(epoch), epoch - 1);
    }
    if (score < best) {
      best = score;
      result.params = params;
      result.params.best_validation_loss = score;
      result.best_epoch = epoch;
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

}  // namespace dnff
