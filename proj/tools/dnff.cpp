// Command-line front end: data generation, noising, training, simulation,
// RDF analysis, the 1D quadrature check and the full experiment.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dnff/analysis.hpp"
#include "dnff/checkpoint.hpp"
#include "dnff/config.hpp"
#include "dnff/denoise.hpp"
#include "dnff/errors.hpp"
#include "dnff/experiment.hpp"
#include "dnff/extxyz.hpp"
#include "dnff/oracle.hpp"
#include "dnff/parallel.hpp"

namespace fs = std::filesystem;
using namespace dnff;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream s(text);
  std::string tok;
  while (std::getline(s, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw UsageError(flag + ": '" + tok + "' is not a number");
    }
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string tok;
  while (std::getline(s, tok, ',')) out.push_back(tok);
  return out;
}

RunConfig config_from(const std::string& path) {
  return path.empty() ? RunConfig{} : load_run_config(path);
}

// Keeps the config next to the outputs it produced.
void keep_config(const std::string& config, const fs::path& target) {
  if (config.empty()) return;
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  fs::copy_file(config, target, fs::copy_options::overwrite_existing);
}

void progress(const std::string& what, long step, long total) {
  if (step % (total / 20 > 0 ? total / 20 : 1) == 0 || step == total) {
    std::cerr << what << ": step " << step << "/" << total << '\n';
  }
}

double model_scale(const ModelParameters& params) {
  const double s = params.training_sigma;
  return s > 0.0 ? 1.0 / (s * s) : 1.0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Denoising force-field toolkit"};
  app.require_subcommand(1);
  std::size_t threads = 1;
  app.add_option("--threads", threads, "Worker threads; 1 is bitwise deterministic")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  // generate
  auto* gen = app.add_subcommand("generate", "Reference trajectory with the exact potential");
  std::string gen_config, gen_out;
  std::optional<long> gen_frames;
  std::optional<std::uint64_t> gen_seed;
  gen->add_option("--config", gen_config, "TOML run configuration")->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "Output extxyz file")->required();
  gen->add_option("--frames", gen_frames,
                  "Frames to record after equilibration (default: from sampler.n_steps)");
  gen->add_option("--seed", gen_seed, "Sampler seed (default: sampler.seed = 1)");

  // noise
  auto* noi = app.add_subcommand("noise", "Build a denoising dataset (r + N, -N)");
  std::string noi_in, noi_out;
  NoiseSpec noi_spec;
  noi->add_option("--in", noi_in, "Input extxyz frames")->required()->check(CLI::ExistingFile);
  noi->add_option("--sigma", noi_spec.sigma, "Noise standard deviation")->capture_default_str();
  noi->add_option("--duplicates", noi_spec.duplicates, "Noise draws per frame")
      ->capture_default_str();
  noi->add_option("--seed", noi_spec.seed, "Noise seed")->capture_default_str();
  noi->add_option("--out", noi_out, "Output extxyz file")->required();

  // train
  auto* trn = app.add_subcommand("train", "Fit the pair model to a labelled dataset");
  std::string trn_config, trn_data, trn_mode, trn_out;
  std::optional<std::uint64_t> trn_seed;
  trn->add_option("--config", trn_config, "TOML run configuration")->check(CLI::ExistingFile);
  trn->add_option("--data", trn_data, "Training extxyz")->required()->check(CLI::ExistingFile);
  trn->add_option("--mode", trn_mode, "force or denoise; must match the dataset labels")
      ->required()
      ->check(CLI::IsMember({"force", "denoise"}));
  trn->add_option("--out", trn_out, "Output checkpoint")->required();
  trn->add_option("--seed", trn_seed, "Training seed (default: train.seed = 1)");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Langevin dynamics with a model or the exact potential");
  std::string sim_model, sim_config, sim_out;
  bool sim_exact = false;
  std::optional<long> sim_steps;
  std::optional<std::uint64_t> sim_seed;
  auto* model_opt = sim->add_option("--model", sim_model, "Checkpoint to drive the dynamics")
                        ->check(CLI::ExistingFile);
  auto* exact_opt = sim->add_flag("--exact", sim_exact, "Use the exact pair potential");
  model_opt->excludes(exact_opt);
  sim->add_option("--config", sim_config, "TOML run configuration")->check(CLI::ExistingFile);
  sim->add_option("--steps", sim_steps, "Total steps (default: sampler.n_steps = 180000)");
  sim->add_option("--seed", sim_seed, "Sampler seed (default: sampler.seed = 1)");
  sim->add_option("--out", sim_out, "Output trajectory extxyz")->required();

  // rdf
  auto* rdf = app.add_subcommand("rdf", "Radial distribution functions of a trajectory");
  std::string rdf_in, rdf_out, rdf_pairs = "Li-Li,Li-Cl,Cl-Cl";
  double rdf_rmax = 4.0;
  std::size_t rdf_bins = 200;
  double rdf_burn = 0.2;
  rdf->add_option("--in", rdf_in, "Trajectory extxyz")->required()->check(CLI::ExistingFile);
  rdf->add_option("--pairs", rdf_pairs, "Comma-separated species pairs")->capture_default_str();
  rdf->add_option("--rmax", rdf_rmax, "Largest distance")->capture_default_str();
  rdf->add_option("--bins", rdf_bins, "Number of bins")->capture_default_str();
  rdf->add_option("--burn-in", rdf_burn, "Leading fraction of frames to skip")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 0.99));
  rdf->add_option("--out", rdf_out, "Output CSV (pair,r,g,counts)")->required();

  // verify
  auto* ver = app.add_subcommand("verify", "Quadrature check of the denoising force in 1D");
  std::string ver_case, ver_sigmas = "0.05,0.1,0.2,0.4", ver_rpoints = "0.3,0.5,1.5", ver_out;
  ver->add_option("--case", ver_case, "gaussian = N(0,1), doublewell = (r^2-1)^2 well")
      ->required()
      ->check(CLI::IsMember({"gaussian", "doublewell"}));
  ver->add_option("--sigmas", ver_sigmas, "Comma-separated noise widths")->capture_default_str();
  ver->add_option("--rpoints", ver_rpoints, "Comma-separated evaluation points")
      ->capture_default_str();
  ver->add_option("--out", ver_out, "Output CSV")->required();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Train the five variants and compare their RDFs");
  std::string exp_config, exp_outdir;
  std::optional<std::uint64_t> exp_seed;
  exp->add_option("--config", exp_config, "TOML run configuration")->check(CLI::ExistingFile);
  exp->add_option("--outdir", exp_outdir, "Run directory")->required();
  exp->add_option("--seed", exp_seed, "Master seed (default: experiment.master_seed = 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << '\n' << app.help() << std::flush;
    return 1;
  }

  set_num_threads(threads);
  std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (gen->parsed()) {
      RunConfig c = config_from(gen_config);
      if (gen_seed) c.sampler.seed = *gen_seed;
      if (gen_frames) {
        if (*gen_frames < 1) throw UsageError("--frames must be >= 1");
        c.sampler.n_steps = c.sampler.n_equilibration + *gen_frames * c.sampler.dump_interval;
      }
      c.system.validate();
      PotentialProvider exact(c.system.potential);
      const auto frames =
          run_trajectory(c.system.initial_configuration(), exact, c.sampler,
                         [](long s, long t) { progress("generate", s, t); });
      write_extxyz_file(gen_out, frames);
      keep_config(gen_config, gen_out + ".config.toml");
      std::cerr << "generate: wrote " << frames.size() << " frames to " << gen_out << '\n';
    } else if (noi->parsed()) {
      const auto frames = read_extxyz_file(noi_in);
      const auto ds = build_dataset(frames, noi_spec);
      write_extxyz_file(noi_out, ds);
      std::cerr << "noise: wrote " << ds.size() << " frames to " << noi_out << '\n';
    } else if (trn->parsed()) {
      RunConfig c = config_from(trn_config);
      if (trn_seed) c.train.seed = *trn_seed;
      SpeciesTable names = c.system.names;
      const auto data = read_extxyz_file(trn_data, names);
      if (data.empty()) throw InvalidDataset(trn_data + ": no frames");
      names = data.front().config.names;
      const LabelKind want = trn_mode == "force" ? LabelKind::Force : LabelKind::NegNoise;
      if (data.front().kind != want) {
        throw InvalidDataset(trn_data + " carries '" + to_string(data.front().kind) +
                             "' labels but --mode is " + trn_mode);
      }
      ModelHyper hyper = c.model;
      hyper.n_species = names.size();
      const auto result = train(data, hyper, c.train, [](const EpochRecord& r) {
        std::cerr << "train: epoch " << r.epoch << " loss " << r.train_loss << " val "
                  << r.validation_loss << '\n';
      });
      write_checkpoint_file(trn_out, result.params);
      keep_config(trn_config, trn_out + ".config.toml");
      std::cerr << "train: best epoch " << result.best_epoch << ", wrote " << trn_out << '\n';
    } else if (sim->parsed()) {
      if (!sim_exact && sim_model.empty()) throw UsageError("simulate needs --model or --exact");
      RunConfig c = config_from(sim_config);
      if (sim_steps) c.sampler.n_steps = *sim_steps;
      if (sim_seed) c.sampler.seed = *sim_seed;
      c.system.validate();
      std::unique_ptr<ForceProvider> provider;
      if (sim_exact) {
        provider = std::make_unique<PotentialProvider>(c.system.potential);
      } else {
        const auto params = read_checkpoint_file(sim_model);
        if (params.species() != c.system.names) {
          throw InvalidInput(sim_model + ": checkpoint species do not match the configured system");
        }
        provider = std::make_unique<TabulatedModelProvider>(params, model_scale(params));
      }
      std::vector<LabeledFrame> traj;
      try {
        run_trajectory(c.system.initial_configuration(), *provider, c.sampler, traj,
                       [](long s, long t) { progress("simulate", s, t); });
      } catch (const DivergenceError&) {
        write_extxyz_file(sim_out, traj);
        throw;
      }
      write_extxyz_file(sim_out, traj);
      keep_config(sim_config, sim_out + ".config.toml");
      std::cerr << "simulate: wrote " << traj.size() << " frames to " << sim_out << '\n';
    } else if (rdf->parsed()) {
      const auto frames = read_extxyz_file(rdf_in);
      if (frames.empty()) throw InsufficientData(rdf_in + ": no frames");
      const auto used = after_burn_in(frames, rdf_burn);
      if (used.empty()) throw InsufficientData(rdf_in + ": no frames left after burn-in");
      const auto& names = frames.front().config.names;
      fs::path out_path(rdf_out);
      if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
      std::ofstream out(out_path);
      if (!out) throw InvalidInput("cannot open '" + rdf_out + "' for writing");
      bool header = true;
      for (const auto& label : split(rdf_pairs)) {
        const auto g = compute_rdf(used, parse_species_pair(label, names), rdf_rmax, rdf_bins, names);
        std::ostringstream block;
        write_rdf_csv(block, g);
        std::string text = block.str();
        if (!header) text = text.substr(text.find('\n') + 1);
        header = false;
        out << text;
      }
      std::cerr << "rdf: " << used.size() << " frames, wrote " << rdf_out << '\n';
    } else if (ver->parsed()) {
      const auto density = ver_case == "gaussian" ? AnalyticDensity1D::gaussian(0.0, 1.0)
                                                  : AnalyticDensity1D::double_well(1.0, 1.0, 1.0);
      const auto report = sigma_sweep(density, parse_list(ver_rpoints, "--rpoints"),
                                      parse_list(ver_sigmas, "--sigmas"));
      write_sweep_csv_file(ver_out, report);
      std::cerr << "verify: slope " << report.slope << " over " << report.fitted_rows << " rows\n";
    } else if (exp->parsed()) {
      RunConfig c = config_from(exp_config);
      if (exp_seed) c.experiment.master_seed = *exp_seed;
      fs::create_directories(exp_outdir);
      keep_config(exp_config, fs::path(exp_outdir) / "config.toml");
      const auto report = run_experiment(c.plan(), exp_outdir,
                                         [](const std::string& m) { std::cerr << m << '\n'; });
      std::cerr << "experiment: wrote " << (fs::path(exp_outdir) / "report.csv").string() << '\n';
      if (report.review_needed) std::cerr << "experiment: flagged for review (see review.txt)\n";
    }
  } catch (const UsageError& e) {
    std::cerr << "dnff " << stage << ": usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "dnff " << stage << ": error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
