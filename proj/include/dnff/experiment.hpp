#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dnff/analysis.hpp"
#include "dnff/core.hpp"
#include "dnff/denoise.hpp"
#include "dnff/model.hpp"
#include "dnff/potentials.hpp"
#include "dnff/sampler.hpp"

namespace dnff {

struct SystemSpec {
  SpeciesTable names{"Li", "Cl"};
  std::vector<std::size_t> counts{32, 32};
  double box_length = 8.0;
  PairPotential potential = PairPotential::toy_licl();

  std::size_t n_particles() const;
  Configuration initial_configuration() const;
  void validate() const;
};

struct RdfSettings {
  double r_max = 4.0;
  std::size_t n_bins = 200;
  double compare_min = 0.8;
  double compare_max = 4.0;
  double window_min = 0.0;
  double window_max = 2.0;
  double threshold = kSpikeThreshold;
  double burn_in_fraction = 0.2;
  std::vector<std::string> pairs{"Li-Li", "Li-Cl", "Cl-Cl"};

  void validate() const;
};

// Drops the leading burn-in fraction of a trajectory.
std::vector<LabeledFrame> after_burn_in(const std::vector<LabeledFrame>& frames, double fraction);

enum class Variant { Bench3000Forces, F500Forces, D500Plain, D500Aug, D1000Plain };

inline constexpr std::array<Variant, 5> kAllVariants{Variant::Bench3000Forces, Variant::F500Forces,
                                                     Variant::D500Plain, Variant::D500Aug,
                                                     Variant::D1000Plain};

const char* to_string(Variant v);

struct VariantSpec {
  std::size_t frames = 0;      // taken from the front of the pool
  std::size_t duplicates = 1;  // noise draws per frame
  bool denoise = false;
};

VariantSpec variant_spec(Variant v);

struct ExperimentPlan {
  SystemSpec system;
  SamplerParams data_sampler;  // reference pool generation
  SamplerParams eval_sampler;  // one run per variant plus the exact potential
  NoiseSpec noise;
  ModelHyper hyper;
  TrainConfig train;
  RdfSettings rdf;
  std::size_t pool_frames = 3000;
  std::size_t heldout_frames = 200;
  std::uint64_t master_seed = 1;

  // Defaults for the 64-particle system: eval runs of 100000 steps with no
  // equilibration; every other member keeps its own default.
  ExperimentPlan();
  void validate() const;
};

struct ReportRow {
  std::string variant;
  std::string pair;
  double l2 = 0.0;
  double linf = 0.0;
  bool instability_flag = false;
  double peak_excess = 0.0;
  double force_mae = 0.0;
  bool diverged = false;
};

struct VariantSummary {
  Variant variant;
  std::size_t dataset_size = 0;
  double force_mae = 0.0;
  double best_validation_loss = 0.0;
  std::size_t best_epoch = 0;
  bool diverged = false;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;  // variant-major in enumeration order, then the exact self-comparison
  std::vector<VariantSummary> variants;
  double exact_force_mae = 0.0;
  bool review_needed = false;  // D500Plain showed no spike in the instability window

  const ReportRow& row(Variant v, const std::string& pair) const;
  const VariantSummary& summary(Variant v) const;
};

inline constexpr const char* kExactLabel = "Exact";

void write_report_csv(std::ostream& out, const ExperimentReport& report);

using LogFn = std::function<void(const std::string&)>;

// Generates the shared pool, trains the five variants, runs an evaluation
// trajectory for each plus the exact potential, and writes
//   frames/pool.extxyz, frames/heldout.extxyz, datasets/<variant>.extxyz,
//   models/<variant>.ckpt, traj/<variant>.extxyz, rdf/<variant>_<pair>.csv,
//   report.csv
// under `outdir`. Every seed is derived from plan.master_seed; the seeds
// inside the sampler, noise and train members are ignored. A failing stage
// raises StageError and leaves earlier artifacts on disk. An evaluation run
// that diverges is reported (flagged, with whatever frames it produced) rather
// than aborting.
ExperimentReport run_experiment(const ExperimentPlan& plan, const std::filesystem::path& outdir,
                                const LogFn& log = {});

// Mean absolute per-component force error of `provider` on force-labelled frames.
double force_mae(const ForceProvider& provider, const std::vector<LabeledFrame>& frames);

}  // namespace dnff
