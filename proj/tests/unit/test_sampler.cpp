#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numeric>

#include "dnff/sampler.hpp"
#include "helpers.hpp"

using namespace dnff;

namespace {

class ZeroForce final : public ForceProvider {
 public:
  EnergyForces evaluate(const Configuration& c) const override {
    return {0.0, Vec3List(c.size(), Vec3::Zero())};
  }
};

// U = k |x - centre|^2 / 2 per particle
class HarmonicTrap final : public ForceProvider {
 public:
  explicit HarmonicTrap(double k, Vec3 centre) : k_(k), centre_(std::move(centre)) {}
  EnergyForces evaluate(const Configuration& c) const override {
    EnergyForces out;
    for (const auto& p : c.positions) out.forces.push_back(-k_ * (p - centre_));
    return out;
  }

 private:
  double k_;
  Vec3 centre_;
};

class BlowUp final : public ForceProvider {
 public:
  explicit BlowUp(int after) : after_(after) {}
  EnergyForces evaluate(const Configuration& c) const override {
    Vec3List f(c.size(), Vec3::Zero());
    if (++calls_ > after_) f[0].x() = std::numeric_limits<double>::quiet_NaN();
    return {0.0, f};
  }

 private:
  int after_;
  mutable int calls_ = 0;
};

Configuration single(double box = 100.0) {
  Configuration c;
  c.box = SimulationBox::cubic(box);
  c.names = {"A"};
  c.positions = {Vec3::Constant(box / 2)};
  c.species = {0};
  return c;
}

}  // namespace

TEST_CASE("parameter validation") {
  SamplerParams p;
  CHECK_NOTHROW(p.validate());
  p.timestep = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.friction = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.temperature = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.dump_interval = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.n_equilibration = -1;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
}

TEST_CASE("zero temperature, zero force, zero velocity is a fixed point") {
  auto c = testing::random_configuration(5, 6.0, 0.5, 2);
  Vec3List v(5, Vec3::Zero());
  SamplerParams p;
  p.temperature = 0.0;
  RngStream rng(1, 1);
  const auto [c2, v2] = langevin_step(c, v, ZeroForce(), p, rng);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(c2.positions[i] == c.positions[i]);
    CHECK(v2[i] == Vec3::Zero());
  }
}

TEST_CASE("free particles thermalise their velocities to T") {
  Configuration c = testing::random_configuration(50, 20.0, 0.1, 4, 1);
  SamplerParams p;
  p.temperature = 1.7;
  p.friction = 50.0;
  p.timestep = 0.01;
  MdState s = make_state(c, ZeroForce());
  RngStream rng(5, 5);
  double sum = 0.0;
  std::size_t n = 0;
  for (int step = 0; step < 4000; ++step) {
    langevin_step(s, ZeroForce(), p, rng, step);
    if (step < 100) continue;
    for (const auto& v : s.velocities) {
      sum += v.squaredNorm();
      n += 3;
    }
  }
  CHECK(sum / n == doctest::Approx(1.7).epsilon(0.02));
}

TEST_CASE("harmonic trap equipartition in position and velocity") {
  const auto c = single();
  HarmonicTrap trap(1.0, c.positions[0]);
  SamplerParams p;
  p.temperature = 1.0;
  p.friction = 1.0;
  p.timestep = 0.01;
  MdState s = make_state(c, trap);
  RngStream rng(11, 3);
  double x2 = 0.0, v2 = 0.0;
  const long steps = 300000;
  for (long k = 0; k < steps; ++k) {
    langevin_step(s, trap, p, rng, k);
    x2 += (s.config.positions[0] - c.positions[0]).squaredNorm();
    v2 += s.velocities[0].squaredNorm();
  }
  CHECK(x2 / (3.0 * steps) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(v2 / (3.0 * steps) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("frame counting and labels") {
  auto c = testing::random_configuration(4, 10.0, 1.5, 1);
  SamplerParams p;
  p.n_steps = 1000;
  p.n_equilibration = 0;
  p.dump_interval = 100;
  const auto frames = run_trajectory(c, ZeroForce(), p);
  CHECK(frames.size() == 10);
  for (const auto& f : frames) {
    CHECK(f.kind == LabelKind::Force);
    CHECK(f.sigma == 0.0);
    CHECK(f.labels.size() == 4);
  }
  p.n_equilibration = 250;
  CHECK(run_trajectory(c, ZeroForce(), p).size() == 7);
  p.dump_interval = 1000;
  CHECK(run_trajectory(c, ZeroForce(), p).size() == 0);
}

TEST_CASE("trajectories are reproducible bit for bit") {
  const auto c = lattice_configuration({4, 4}, 8.0, {"Li", "Cl"});
  PotentialProvider pot(PairPotential::toy_licl());
  SamplerParams p;
  p.n_steps = 400;
  p.n_equilibration = 100;
  p.dump_interval = 50;
  p.seed = 9;
  const auto a = run_trajectory(c, pot, p);
  const auto b = run_trajectory(c, pot, p);
  REQUIRE(a.size() == 6);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(std::memcmp(a[k].config.positions.data(), b[k].config.positions.data(),
                      sizeof(Vec3) * a[k].config.size()) == 0);
    CHECK(std::memcmp(a[k].labels.data(), b[k].labels.data(), sizeof(Vec3) * a[k].config.size()) ==
          0);
  }
  p.seed = 10;
  const auto d = run_trajectory(c, pot, p);
  CHECK(d.back().config.positions[0] != a.back().config.positions[0]);
}

TEST_CASE("positions stay wrapped and labels are the provider forces") {
  const auto c = lattice_configuration({4, 4}, 8.0, {"Li", "Cl"});
  PotentialProvider pot(PairPotential::toy_licl());
  SamplerParams p;
  p.n_steps = 2000;
  p.n_equilibration = 0;
  p.dump_interval = 200;
  for (const auto& f : run_trajectory(c, pot, p)) {
    for (const auto& x : f.config.positions) {
      CHECK(x.minCoeff() >= 0.0);
      CHECK(x.maxCoeff() < 8.0);
    }
    const auto exact = pot.evaluate(f.config).forces;
    for (std::size_t i = 0; i < exact.size(); ++i) CHECK((exact[i] - f.labels[i]).norm() == 0.0);
  }
}

TEST_CASE("divergence reports the step and keeps finished frames") {
  auto c = testing::random_configuration(3, 10.0, 1.0, 1);
  SamplerParams p;
  p.n_steps = 100;
  p.n_equilibration = 0;
  p.dump_interval = 10;
  std::vector<LabeledFrame> out;
  try {
    run_trajectory(c, BlowUp(35), p, out);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.index == 35);
    CHECK(e.completed == 3);
  }
  CHECK(out.size() == 3);
}

TEST_CASE("metropolis moments for the unit gaussian") {
  const auto g = AnalyticDensity1D::gaussian(0.0, 1.0);
  RngStream rng(2, streams::kMetropolis);
  const auto xs = mc_sample_1d(g, 100000, 2.5, rng);
  REQUIRE(xs.size() == 100000);
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= xs.size() - 1;
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  // thinned chain: allow for residual correlation with a generous 3 sigma band
  CHECK(std::abs(mean) < 3.0 * 1.5 / std::sqrt(100000.0));
}

TEST_CASE("metropolis double well is bimodal near +-1") {
  const auto dw = AnalyticDensity1D::double_well(1.0, 1.0, 1.0);
  RngStream rng(3, streams::kMetropolis);
  const auto xs = mc_sample_1d(dw, 50000, 2.5, rng);
  std::vector<int> hist(40, 0);
  for (double x : xs) {
    const int b = static_cast<int>(std::floor((x + 2.0) / 0.1));
    if (b >= 0 && b < 40) ++hist[b];
  }
  const auto left = std::max_element(hist.begin(), hist.begin() + 20) - hist.begin();
  const auto right = std::max_element(hist.begin() + 20, hist.end()) - hist.begin();
  CHECK(-2.0 + 0.1 * (left + 0.5) == doctest::Approx(-1.0).epsilon(0.2));
  CHECK(-2.0 + 0.1 * (right + 0.5) == doctest::Approx(1.0).epsilon(0.2));
  CHECK(hist[20] < hist[left] / 2);
  std::size_t positive = 0;
  for (double x : xs) positive += x > 0;
  CHECK(positive > 20000);
  CHECK(positive < 30000);
  RngStream bad(1, 1);
  CHECK_THROWS_AS(mc_sample_1d(dw, 10, 0.0, bad), InvalidArgument);
}
