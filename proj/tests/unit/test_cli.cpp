#include <doctest.h>

#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "dnff/checkpoint.hpp"
#include "dnff/extxyz.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Run run_cli(const std::string& args) {
  static const fs::path dir = testing::scratch_dir("cli_io");
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + DNFF_CLI + "\" " + args + " >\"" + out.string() +
                          "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

const char* kSmallConfig = R"(
[system]
counts = [4, 4]
[sampler]
n_steps = 600
n_equilibration = 100
dump_interval = 10
[model]
n_rbf = 4
hidden_sizes = [4]
[train]
epochs = 2
)";

}  // namespace

TEST_CASE("help and usage errors") {
  const auto help = run_cli("--help");
  CHECK(help.code == 0);
  CHECK(help.out.find("experiment") != std::string::npos);
  CHECK(run_cli("verify --help").code == 0);

  const auto bad = run_cli("verify --case gaussian --bogus 1 --out x.csv");
  CHECK(bad.code == 1);
  CHECK(bad.err.find("--bogus") != std::string::npos);
  CHECK(run_cli("").code == 1);
  CHECK(run_cli("verify --case cubic --out x.csv").code == 1);
  CHECK(run_cli("simulate --out x.extxyz").code == 1);
}

TEST_CASE("verify writes the sweep csv") {
  const auto dir = testing::scratch_dir("cli_verify");
  const auto csv = dir / "dw.csv";
  const auto r = run_cli("verify --case doublewell --sigmas 0.05,0.1,0.2 --rpoints 0.3,0.5,1.5 --out \"" +
                      csv.string() + "\"");
  REQUIRE(r.code == 0);
  const auto text = slurp(csv);
  CHECK(text.rfind("density,r,sigma,f_true,f_dn_exact,f_dn_first,f_dn_second,delta_dn\n", 0) == 0);
  const auto at = text.find("# slope=");
  REQUIRE(at != std::string::npos);
  CHECK(std::stod(text.substr(at + 8)) == doctest::Approx(2.0).epsilon(0.15));

  CHECK(run_cli("verify --case gaussian --sigmas 0.1,0.2 --rpoints 0.5 --out \"" + csv.string() + "\"")
            .code == 2);
}

TEST_CASE("generate, noise, train, simulate, rdf") {
  const auto dir = testing::scratch_dir("cli_pipeline");
  const auto cfg = dir / "small.toml";
  std::ofstream(cfg) << kSmallConfig;
  auto q = [&](const char* name) { return "\"" + (dir / name).string() + "\""; };
  const std::string c = " --config \"" + cfg.string() + "\"";

  REQUIRE(run_cli("generate" + c + " --out " + q("ref.extxyz")).code == 0);
  CHECK(dnff::read_extxyz_file(dir / "ref.extxyz").size() == 50);
  CHECK(fs::exists(dir / "ref.extxyz.config.toml"));
  REQUIRE(run_cli("generate" + c + " --frames 20 --seed 4 --out " + q("ref20.extxyz")).code == 0);
  CHECK(dnff::read_extxyz_file(dir / "ref20.extxyz").size() == 20);

  REQUIRE(run_cli("noise --in " + q("ref.extxyz") + " --sigma 0.1 --duplicates 2 --seed 3 --out " +
               q("noised.extxyz"))
              .code == 0);
  const auto noised = dnff::read_extxyz_file(dir / "noised.extxyz");
  CHECK(noised.size() == 100);
  CHECK(noised.front().kind == dnff::LabelKind::NegNoise);

  CHECK(run_cli("train" + c + " --data " + q("noised.extxyz") + " --mode force --out " + q("m.ckpt"))
            .code == 2);
  REQUIRE(run_cli("train" + c + " --data " + q("noised.extxyz") + " --mode denoise --out " +
               q("m.ckpt"))
              .code == 0);
  CHECK(dnff::read_checkpoint_file(dir / "m.ckpt").training_sigma == 0.1);

  REQUIRE(run_cli("simulate" + c + " --model " + q("m.ckpt") + " --steps 300 --out " + q("sim.extxyz"))
              .code == 0);
  CHECK(dnff::read_extxyz_file(dir / "sim.extxyz").size() == 20);
  CHECK(run_cli("simulate" + c + " --model " + q("m.ckpt") + " --exact --out " + q("x.extxyz")).code ==
        1);
  REQUIRE(run_cli("simulate" + c + " --exact --steps 300 --out " + q("exact.extxyz")).code == 0);

  REQUIRE(run_cli("rdf --in " + q("ref.extxyz") + " --pairs Li-Li,Li-Cl --rmax 4 --bins 20 --out " +
               q("g.csv"))
              .code == 0);
  const auto g = slurp(dir / "g.csv");
  CHECK(g.rfind("pair,r,g,counts\n", 0) == 0);
  CHECK(std::count(g.begin(), g.end(), '\n') == 41);
  CHECK(run_cli("rdf --in " + q("ref.extxyz") + " --rmax 5 --out " + q("g.csv")).code == 2);
}

TEST_CASE("configuration errors exit with code 2 and name the key") {
  const auto dir = testing::scratch_dir("cli_config");
  std::ofstream(dir / "bad.toml") << "[sampler]\nstep = 1\n";
  const auto r = run_cli("generate --config \"" + (dir / "bad.toml").string() + "\" --out \"" +
                      (dir / "x.extxyz").string() + "\"");
  CHECK(r.code == 2);
  CHECK(r.err.find("sampler.step") != std::string::npos);
  CHECK(r.err.find("dnff generate: error") != std::string::npos);
}
