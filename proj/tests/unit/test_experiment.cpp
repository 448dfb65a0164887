#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dnff/experiment.hpp"
#include "dnff/extxyz.hpp"
#include "helpers.hpp"

using namespace dnff;
namespace fs = std::filesystem;

namespace {

// Eight particles and a one-epoch model: exercises every stage in seconds.
ExperimentPlan tiny_plan() {
  ExperimentPlan p;
  p.system.counts = {4, 4};
  p.data_sampler.n_steps = 3300;
  p.data_sampler.n_equilibration = 50;
  p.data_sampler.dump_interval = 1;
  p.eval_sampler.n_steps = 400;
  p.eval_sampler.dump_interval = 10;
  p.hyper.n_rbf = 4;
  p.hyper.hidden_sizes = {4};
  p.train.epochs = 1;
  p.train.batch_size = 500;
  p.heldout_frames = 20;
  p.rdf.n_bins = 40;
  return p;
}

}  // namespace

TEST_CASE("variant table") {
  CHECK(variant_spec(Variant::Bench3000Forces).frames == 3000);
  CHECK_FALSE(variant_spec(Variant::F500Forces).denoise);
  CHECK(variant_spec(Variant::D500Aug).duplicates == 2);
  CHECK(variant_spec(Variant::D500Aug).frames == 500);
  CHECK(variant_spec(Variant::D1000Plain).frames == 1000);
  CHECK(std::string(to_string(Variant::D500Plain)) == "D500Plain");
}

TEST_CASE("plan validation") {
  ExperimentPlan p;
  CHECK_NOTHROW(p.validate());
  p.pool_frames = 2999;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = ExperimentPlan();
  p.data_sampler.n_steps = 100000;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = ExperimentPlan();
  p.system.box_length = 7.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = ExperimentPlan();
  p.hyper.n_species = 3;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("burn-in trimming") {
  std::vector<LabeledFrame> frames(10);
  CHECK(after_burn_in(frames, 0.2).size() == 8);
  CHECK(after_burn_in(frames, 0.0).size() == 10);
}

TEST_CASE("tiny end-to-end run writes every artifact") {
  const auto dir = testing::scratch_dir("experiment");
  std::vector<std::string> log;
  const auto report = run_experiment(tiny_plan(), dir, [&](const std::string& s) { log.push_back(s); });
  CHECK_FALSE(log.empty());

  CHECK(report.variants.size() == 5);
  CHECK(report.rows.size() == 5 * 3 + 1);
  CHECK(report.rows.back().variant == kExactLabel);
  CHECK(report.rows.back().l2 == 0.0);
  CHECK(report.summary(Variant::D500Aug).dataset_size == 1000);
  CHECK(report.summary(Variant::Bench3000Forces).dataset_size == 3000);
  CHECK(std::isfinite(report.exact_force_mae));
  const auto& row = report.row(Variant::D500Plain, "Li-Li");
  CHECK(row.variant == "D500Plain");

  for (const char* f : {"frames/pool.extxyz", "frames/heldout.extxyz", "report.csv",
                        "datasets/D500Aug.extxyz", "models/D1000Plain.ckpt",
                        "traj/Exact.extxyz", "traj/F500Forces.extxyz", "rdf/Exact_Li-Cl.csv",
                        "rdf/D500Aug_Cl-Cl.csv"}) {
    CHECK_MESSAGE(fs::exists(dir / f), f);
  }
  CHECK(read_extxyz_file(dir / "frames/pool.extxyz").size() == 3000);
  CHECK(read_extxyz_file(dir / "frames/heldout.extxyz").size() == 20);
  CHECK(read_extxyz_file(dir / "datasets/D500Aug.extxyz").size() == 1000);
  CHECK(fs::exists(dir / "review.txt") == report.review_needed);

  std::ifstream csv(dir / "report.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "variant,pair,l2,linf,instability_flag,peak_excess,force_mae");
  int lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  CHECK(lines == 16);

  std::ostringstream again;
  write_report_csv(again, report);
  std::ifstream whole(dir / "report.csv");
  std::stringstream disk;
  disk << whole.rdbuf();
  CHECK(disk.str() == again.str());
}

TEST_CASE("stage failures name the stage") {
  auto plan = tiny_plan();
  const auto dir = testing::scratch_dir("experiment_fail");
  // a directory where the pool file should go
  fs::create_directories(dir / "frames" / "pool.extxyz");
  try {
    run_experiment(plan, dir);
    FAIL("expected a stage error");
  } catch (const StageError& e) {
    CHECK(e.stage == "generate");
  }
}
