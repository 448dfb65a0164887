#include "dnff/experiment.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "dnff/checkpoint.hpp"
#include "dnff/errors.hpp"
#include "dnff/extxyz.hpp"

namespace dnff {

namespace fs = std::filesystem;

std::size_t SystemSpec::n_particles() const {
  std::size_t n = 0;
  for (auto c : counts) n += c;
  return n;
}

Configuration SystemSpec::initial_configuration() const {
  return lattice_configuration(counts, box_length, names);
}

void SystemSpec::validate() const {
  if (names.empty() || names.size() != counts.size()) {
    throw InvalidArgument("system: species names and counts must have the same nonzero length");
  }
  if (names.size() != potential.n_species()) {
    throw InvalidArgument("system: potential is defined for " +
                          std::to_string(potential.n_species()) + " species, system has " +
                          std::to_string(names.size()));
  }
  if (n_particles() < 2) throw InvalidArgument("system: need at least 2 particles");
  if (!(box_length > 0.0)) throw InvalidArgument("system: box_length must be > 0");
  if (potential.max_cutoff() > 0.5 * box_length) {
    throw InvalidArgument("system: potential cutoff exceeds half the box length");
  }
}

void RdfSettings::validate() const {
  if (!(r_max > 0.0) || n_bins == 0) throw InvalidArgument("rdf: need r_max > 0 and n_bins > 0");
  if (!(compare_min < compare_max) || !(window_min < window_max)) {
    throw InvalidArgument("rdf: comparison and instability windows must be nonempty");
  }
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
    throw InvalidArgument("rdf: burn_in_fraction must be in [0, 1)");
  }
  if (pairs.empty()) throw InvalidArgument("rdf: no species pairs");
}

std::vector<LabeledFrame> after_burn_in(const std::vector<LabeledFrame>& frames, double fraction) {
  const auto skip = static_cast<std::size_t>(std::floor(fraction * frames.size()));
  return {frames.begin() + static_cast<std::ptrdiff_t>(skip), frames.end()};
}

const char* to_string(Variant v) {
  switch (v) {
    case Variant::Bench3000Forces: return "Bench3000Forces";
    case Variant::F500Forces: return "F500Forces";
    case Variant::D500Plain: return "D500Plain";
    case Variant::D500Aug: return "D500Aug";
    case Variant::D1000Plain: return "D1000Plain";
  }
  return "?";
}

VariantSpec variant_spec(Variant v) {
  switch (v) {
    case Variant::Bench3000Forces: return {3000, 1, false};
    case Variant::F500Forces: return {500, 1, false};
    case Variant::D500Plain: return {500, 1, true};
    case Variant::D500Aug: return {500, 2, true};
    case Variant::D1000Plain: return {1000, 1, true};
  }
  throw InvalidArgument("unknown variant");
}

ExperimentPlan::ExperimentPlan() {
  eval_sampler.n_steps = 100000;
  eval_sampler.n_equilibration = 0;
}

void ExperimentPlan::validate() const {
  system.validate();
  data_sampler.validate();
  eval_sampler.validate();
  noise.validate();
  hyper.validate();
  train.validate();
  rdf.validate();
  if (hyper.n_species != system.names.size()) {
    throw InvalidArgument("experiment: model n_species does not match the system");
  }
  std::size_t needed = 0;
  for (auto v : kAllVariants) needed = std::max(needed, variant_spec(v).frames);
  if (pool_frames < needed) {
    throw InvalidArgument("experiment: pool_frames must be at least " + std::to_string(needed));
  }
  if (heldout_frames == 0) throw InvalidArgument("experiment: heldout_frames must be > 0");
  const long produced =
      (data_sampler.n_steps - data_sampler.n_equilibration) / data_sampler.dump_interval;
  if (produced < static_cast<long>(pool_frames + heldout_frames)) {
    throw InvalidArgument("experiment: data sampler yields " + std::to_string(produced) +
                          " frames, need " + std::to_string(pool_frames + heldout_frames));
  }
  if (rdf.r_max > 0.5 * system.box_length) {
    throw InvalidArgument("experiment: rdf r_max exceeds half the box length");
  }
}

const ReportRow& ExperimentReport::row(Variant v, const std::string& pair) const {
  for (const auto& r : rows) {
    if (r.variant == to_string(v) && r.pair == pair) return r;
  }
  throw InvalidArgument(std::string("report has no row ") + to_string(v) + "/" + pair);
}

const VariantSummary& ExperimentReport::summary(Variant v) const {
  for (const auto& s : variants) {
    if (s.variant == v) return s;
  }
  throw InvalidArgument(std::string("report has no variant ") + to_string(v));
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out << "variant,pair,l2,linf,instability_flag,peak_excess,force_mae\n";
  for (const auto& r : report.rows) {
    out << r.variant << ',' << r.pair << ',' << format_double(r.l2) << ','
        << format_double(r.linf) << ',' << (r.instability_flag ? 1 : 0) << ','
        << format_double(r.peak_excess) << ',' << format_double(r.force_mae) << '\n';
  }
}

namespace {

// Untabulated model forces times a fixed factor.
class DirectModelProvider final : public ForceProvider {
 public:
  DirectModelProvider(const ModelParameters& params, double scale)
      : params_(params), scale_(scale) {}
  EnergyForces evaluate(const Configuration& config) const override {
    EnergyForces out;
    out.energy = std::numeric_limits<double>::quiet_NaN();
    out.forces = predict_forces(params_, config);
    for (auto& f : out.forces) f *= scale_;
    return out;
  }

 private:
  const ModelParameters& params_;
  double scale_;
};

template <typename F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct RunOutcome {
  std::vector<RdfHistogram> rdfs;
  bool diverged = false;
};

}  // namespace

double force_mae(const ForceProvider& provider, const std::vector<LabeledFrame>& frames) {
  if (frames.empty()) throw InsufficientData("force_mae: no frames");
  double sum = 0.0;
  double count = 0.0;
  for (const auto& f : frames) {
    if (f.kind != LabelKind::Force) throw InvalidDataset("force_mae: frames must carry forces");
    const auto pred = provider.evaluate(f.config).forces;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - f.labels[i]).cwiseAbs().sum();
    count += 3.0 * static_cast<double>(pred.size());
  }
  return sum / count;
}

ExperimentReport run_experiment(const ExperimentPlan& plan, const fs::path& outdir,
                                const LogFn& log) {
  plan.validate();
  auto note = [&](const std::string& msg) {
    if (log) log(msg);
  };
  const auto& names = plan.system.names;
  fs::create_directories(outdir / "frames");
  fs::create_directories(outdir / "datasets");
  fs::create_directories(outdir / "models");
  fs::create_directories(outdir / "traj");
  fs::create_directories(outdir / "rdf");

  std::vector<SpeciesPair> pairs;
  for (const auto& p : plan.rdf.pairs) pairs.push_back(parse_species_pair(p, names));

  // 1. shared reference pool plus held-out frames
  std::vector<LabeledFrame> pool, heldout;
  stage("generate", [&] {
    note("generating reference frames");
    SamplerParams sp = plan.data_sampler;
    sp.seed = plan.master_seed;
    sp.stream_id = streams::kSampler;
    PotentialProvider exact(plan.system.potential);
    auto frames = run_trajectory(plan.system.initial_configuration(), exact, sp);
    pool.assign(frames.begin(), frames.begin() + static_cast<std::ptrdiff_t>(plan.pool_frames));
    heldout.assign(frames.begin() + static_cast<std::ptrdiff_t>(plan.pool_frames),
                   frames.begin() +
                       static_cast<std::ptrdiff_t>(plan.pool_frames + plan.heldout_frames));
    write_extxyz_file(outdir / "frames" / "pool.extxyz", pool);
    write_extxyz_file(outdir / "frames" / "heldout.extxyz", heldout);
    return 0;
  });

  SamplerParams eval = plan.eval_sampler;
  eval.seed = derive_stream({plan.master_seed, 0xe7a1});
  eval.stream_id = streams::kSampler;
  const Configuration eval_start = heldout.back().config;

  auto simulate = [&](const std::string& label, const ForceProvider& provider) {
    RunOutcome outcome;
    std::vector<LabeledFrame> traj;
    stage("simulate:" + label, [&] {
      note("evaluation run " + label);
      try {
        run_trajectory(eval_start, provider, eval, traj);
      } catch (const DivergenceError& e) {
        outcome.diverged = true;
        note("evaluation run " + label + " diverged after " + std::to_string(traj.size()) +
             " frames: " + e.what());
      }
      write_extxyz_file(outdir / "traj" / (label + ".extxyz"), traj);
      return 0;
    });
    stage("rdf:" + label, [&] {
      const auto used = after_burn_in(traj, plan.rdf.burn_in_fraction);
      if (used.empty()) return 0;
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        auto g = compute_rdf(used, pairs[p], plan.rdf.r_max, plan.rdf.n_bins, names);
        write_rdf_csv_file(outdir / "rdf" / (label + "_" + plan.rdf.pairs[p] + ".csv"), g);
        outcome.rdfs.push_back(std::move(g));
      }
      return 0;
    });
    return outcome;
  };

  const PotentialProvider exact(plan.system.potential);
  const RunOutcome reference = simulate(kExactLabel, exact);
  if (reference.diverged || reference.rdfs.empty()) {
    throw StageError("simulate:Exact", "the exact-potential run did not complete");
  }

  ExperimentReport report;
  for (std::size_t vi = 0; vi < kAllVariants.size(); ++vi) {
    const Variant v = kAllVariants[vi];
    const std::string label = to_string(v);
    const VariantSpec spec = variant_spec(v);
    const std::vector<LabeledFrame> source(pool.begin(),
                                           pool.begin() + static_cast<std::ptrdiff_t>(spec.frames));

    const auto dataset = stage("dataset:" + label, [&] {
      std::vector<LabeledFrame> ds;
      if (spec.denoise) {
        NoiseSpec ns = plan.noise;
        ns.duplicates = spec.duplicates;
        ns.seed = plan.master_seed;
        ds = build_dataset(source, ns);
      } else {
        ds = source;
      }
      write_extxyz_file(outdir / "datasets" / (label + ".extxyz"), ds);
      return ds;
    });

    const auto trained = stage("train:" + label, [&] {
      TrainConfig tc = plan.train;
      tc.seed = derive_stream({plan.master_seed, vi});
      note("training " + label + " on " + std::to_string(dataset.size()) + " frames");
      auto result = train(dataset, plan.hyper, tc, [&](const EpochRecord& rec) {
        if (rec.epoch % 10 == 0 || rec.epoch == tc.epochs) {
          std::ostringstream s;
          s << "  " << label << " epoch " << rec.epoch << " train " << rec.train_loss << " val "
            << rec.validation_loss;
          note(s.str());
        }
      });
      write_checkpoint_file(outdir / "models" / (label + ".ckpt"), result.params);
      return result;
    });

    const double scale = spec.denoise ? 1.0 / (plan.noise.sigma * plan.noise.sigma) : 1.0;
    VariantSummary summary;
    summary.variant = v;
    summary.dataset_size = dataset.size();
    summary.best_validation_loss = trained.params.best_validation_loss;
    summary.best_epoch = trained.best_epoch;
    summary.force_mae = stage("evaluate:" + label, [&] {
      return force_mae(DirectModelProvider(trained.params, scale), heldout);
    });

    const TabulatedModelProvider provider(trained.params, scale);
    const RunOutcome run = simulate(label, provider);
    summary.diverged = run.diverged;

    for (std::size_t p = 0; p < pairs.size(); ++p) {
      ReportRow row;
      row.variant = label;
      row.pair = plan.rdf.pairs[p];
      row.force_mae = summary.force_mae;
      row.diverged = run.diverged;
      if (run.rdfs.empty()) {
        row.l2 = row.linf = row.peak_excess = std::numeric_limits<double>::infinity();
        row.instability_flag = true;
      } else {
        const auto d = rdf_distance(run.rdfs[p], reference.rdfs[p], plan.rdf.compare_min,
                                    plan.rdf.compare_max);
        const auto inst = detect_instability(run.rdfs[p], reference.rdfs[p], plan.rdf.window_min,
                                             plan.rdf.window_max, plan.rdf.threshold);
        row.l2 = d.l2;
        row.linf = d.linf;
        row.peak_excess = inst.peak_excess;
        row.instability_flag = inst.flag || run.diverged;
      }
      report.rows.push_back(row);
    }
    report.variants.push_back(summary);
    std::ostringstream s;
    s << label << ": force MAE " << summary.force_mae << (run.diverged ? " (diverged)" : "");
    note(s.str());
  }

  // exact run against itself
  ReportRow self;
  self.variant = kExactLabel;
  self.pair = "all";
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto d = rdf_distance(reference.rdfs[p], reference.rdfs[p], plan.rdf.compare_min,
                                plan.rdf.compare_max);
    const auto inst = detect_instability(reference.rdfs[p], reference.rdfs[p],
                                         plan.rdf.window_min, plan.rdf.window_max,
                                         plan.rdf.threshold);
    self.l2 = std::max(self.l2, d.l2);
    self.linf = std::max(self.linf, d.linf);
    self.peak_excess = std::max(self.peak_excess, inst.peak_excess);
    self.instability_flag = self.instability_flag || inst.flag;
  }
  report.exact_force_mae = force_mae(exact, heldout);
  self.force_mae = report.exact_force_mae;
  report.rows.push_back(self);

  bool spike = false;
  for (const auto& r : report.rows) {
    if (r.variant == to_string(Variant::D500Plain) && r.instability_flag) spike = true;
  }
  report.review_needed = !spike;

  stage("report", [&] {
    std::ofstream out(outdir / "report.csv");
    if (!out) throw InvalidInput("cannot write " + (outdir / "report.csv").string());
    write_report_csv(out, report);
    if (report.review_needed) {
      std::ofstream review(outdir / "review.txt");
      review << "D500Plain shows no spike in the instability window; peak_excess per pair:\n";
      for (const auto& r : report.rows) {
        if (r.variant == to_string(Variant::D500Plain)) {
          review << r.pair << ' ' << format_double(r.peak_excess) << '\n';
        }
      }
    }
    return 0;
  });
  if (report.review_needed) note("review: D500Plain shows no instability spike");
  return report;
}

}  // namespace dnff
