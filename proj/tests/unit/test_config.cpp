#include <doctest.h>

#include <fstream>

#include "dnff/config.hpp"
#include "helpers.hpp"

using namespace dnff;

TEST_CASE("toml subset") {
  const auto doc = parse_toml(R"(
top = 3
[a]
x = 1.5   # trailing comment
name = "Li # not a comment"
flag = true
list = [1, 2.5, "s"]
neg = -7
)");
  CHECK(std::get<std::int64_t>(doc.at("top").value) == 3);
  CHECK(std::get<double>(doc.at("a.x").value) == 1.5);
  CHECK(std::get<std::string>(doc.at("a.name").value) == "Li # not a comment");
  CHECK(std::get<bool>(doc.at("a.flag").value));
  CHECK(std::get<std::vector<TomlScalar>>(doc.at("a.list").value).size() == 3);
  CHECK(std::get<std::int64_t>(doc.at("a.neg").value) == -7);
  CHECK(doc.at("a.x").line == 4);

  CHECK_THROWS_AS(parse_toml("[a]\nx = 1\nx = 2\n"), InvalidInput);
  CHECK_THROWS_AS(parse_toml("[a]\n[a]\n"), InvalidInput);
  CHECK_THROWS_AS(parse_toml("x 1\n"), InvalidInput);
  CHECK_THROWS_AS(parse_toml("x = \"open\n"), InvalidInput);
  CHECK_THROWS_AS(parse_toml("[a\n"), InvalidInput);
}

TEST_CASE("empty config keeps every default") {
  const auto c = parse_run_config("");
  CHECK(c.system.n_particles() == 64);
  CHECK(c.sampler.timestep == SamplerParams{}.timestep);
  CHECK(c.noise.sigma == 0.1);
  CHECK(c.model == ModelHyper{});
  CHECK(c.rdf.n_bins == 200);
  const auto plan = c.plan();
  CHECK_NOTHROW(plan.validate());
  CHECK(plan.eval_sampler.n_steps == 100000);
  CHECK(plan.train.epochs == 400);
}

TEST_CASE("overrides") {
  const auto c = parse_run_config(R"(
[system]
counts = [10, 10]
box_length = 9.0
[sampler]
timestep = 0.002
n_steps = 5000
[noise]
sigma = 0.05
duplicates = 3
[model]
hidden_sizes = [16]
[train]
learning_rate = 0.01
[rdf]
pairs = ["Li-Cl"]
[experiment]
master_seed = 12
train_epochs = 7
)");
  CHECK(c.system.counts == std::vector<std::size_t>{10, 10});
  CHECK(c.system.box_length == 9.0);
  CHECK(c.sampler.timestep == 0.002);
  CHECK(c.sampler.n_steps == 5000);
  CHECK(c.noise.duplicates == 3);
  CHECK(c.model.hidden_sizes == std::vector<std::size_t>{16});
  CHECK(c.train.learning_rate == 0.01);
  CHECK(c.rdf.pairs == std::vector<std::string>{"Li-Cl"});
  const auto plan = c.plan();
  CHECK(plan.master_seed == 12);
  CHECK(plan.train.epochs == 7);
  // integers are accepted where floats are expected
  CHECK(parse_run_config("[system]\nbox_length = 10\n").system.box_length == 10.0);
}

TEST_CASE("custom potential") {
  const auto c = parse_run_config(R"(
[potential]
epsilon = 0.5
lj_sigma = [1.0, 1.1, 1.2]
charge_product = [0.0, 0.0, 0.0]
cutoff = 3.0
)");
  CHECK(c.system.potential.params(0, 1).lj_sigma == 1.1);
  CHECK(c.system.potential.params(1, 1).epsilon == 0.5);
  CHECK(c.system.potential.max_cutoff() == 3.0);
  CHECK_THROWS_AS(parse_run_config("[potential]\nlj_sigma = [1.0]\n"), InvalidInput);
}

TEST_CASE("bad keys and types are reported") {
  auto message = [](const std::string& text) {
    try {
      parse_run_config(text);
    } catch (const InvalidInput& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("[sampler]\ntimestpe = 0.1\n").find("sampler.timestpe") != std::string::npos);
  CHECK(message("[samplr]\ntimestep = 0.1\n").find("samplr") != std::string::npos);
  CHECK(message("[sampler]\ntimestep = \"fast\"\n").find("line 2") != std::string::npos);
  CHECK_FALSE(message("[sampler]\nseed = -1\n").empty());
  CHECK_FALSE(message("[model]\nhidden_sizes = 3\n").empty());
  CHECK_FALSE(message("[noise]\nsigma = [0.1]\n").empty());
}

TEST_CASE("loading from disk prefixes the path") {
  const auto dir = testing::scratch_dir("config");
  {
    std::ofstream(dir / "bad.toml") << "[bogus]\nx = 1\n";
  }
  try {
    load_run_config(dir / "bad.toml");
    FAIL("expected an error");
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("bad.toml") != std::string::npos);
  }
  CHECK_THROWS_AS(load_run_config(dir / "none.toml"), InvalidInput);
}
