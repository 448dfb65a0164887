#include <doctest.h>

#include <cmath>
#include <sstream>

#include "dnff/oracle.hpp"

using namespace dnff;

namespace {
const auto unit = AnalyticDensity1D::gaussian(0.0, 1.0);
const auto dw = AnalyticDensity1D::double_well(1.0, 1.0, 1.0);

double gaussian_closed_form(double sigma, double r) { return -r * sigma * sigma / (1 + sigma * sigma); }
}  // namespace

TEST_CASE("densities and their derivatives") {
  CHECK(unit.rho(0.0) == 1.0);
  CHECK(unit.score(0.7) == doctest::Approx(-0.7));
  CHECK(unit.curvature(0.5) == doctest::Approx(-0.75));
  CHECK(dw.score(0.5) == doctest::Approx(1.5));
  CHECK(dw.mode() == doctest::Approx(1.0));
  CHECK(unit.symmetric_about_zero());
  CHECK_FALSE(AnalyticDensity1D::gaussian(0.3, 1.0).symmetric_about_zero());
  CHECK_THROWS_AS(AnalyticDensity1D::gaussian(0.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(AnalyticDensity1D::double_well(-1.0, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("f_true") {
  CHECK(f_true(unit, 0.5) == doctest::Approx(-0.5));
  CHECK(f_true(unit, 0.0) == 0.0);
  CHECK(f_true(dw, 0.0) == 0.0);
  CHECK(f_true(dw, 0.5) == doctest::Approx(1.5));
  CHECK_THROWS_AS(f_true(unit, 1e3), DomainError);
}

TEST_CASE("f_dn_exact against the gaussian closed form") {
  CHECK(f_dn_exact(unit, 0.2, 0.5) == doctest::Approx(-0.0192308).epsilon(1e-5));
  CHECK(f_dn_exact(unit, 0.1, 1.0) == doctest::Approx(-0.00990099).epsilon(1e-5));
  for (double sigma : {0.01, 0.05, 0.3, 0.7, 1.0}) {
    for (double r : {-3.0, -1.2, 0.0, 0.4, 2.5, 3.0}) {
      CHECK(std::abs(f_dn_exact(unit, sigma, r) - gaussian_closed_form(sigma, r)) < 1e-9);
    }
  }
  // shifted, wider gaussian: closed form -(r - mu) sigma^2 / (s^2 + sigma^2)
  const auto g = AnalyticDensity1D::gaussian(1.0, 2.0);
  CHECK(f_dn_exact(g, 0.3, 2.0) == doctest::Approx(-0.022004889975550121).epsilon(1e-9));
  CHECK_THROWS_AS(f_dn_exact(unit, 0.0, 1.0), InvalidArgument);
}

TEST_CASE("f_dn_exact on the double well, frozen high-precision values") {
  CHECK(std::abs(f_dn_exact(dw, 0.1, 0.5) - 0.014511026811275723) < 1e-10);
  CHECK(std::abs(f_dn_exact(dw, 0.2, 1.5) - -0.17514365967190697) < 1e-10);
  CHECK(std::abs(f_dn_exact(dw, 0.05, 0.3) - 0.0027269723090948971) < 1e-10);
  CHECK(std::abs(f_dn_exact(dw, 0.4, -0.5) - -0.099666720672523213) < 1e-10);
}

TEST_CASE("f_dn_exact is odd for symmetric densities") {
  for (double sigma : {0.05, 0.2, 0.6}) {
    CHECK(std::abs(f_dn_exact(dw, sigma, 0.0)) < 1e-10);
    for (double r : {0.2, 0.9, 1.7}) {
      CHECK(std::abs(f_dn_exact(dw, sigma, r) + f_dn_exact(dw, sigma, -r)) < 2e-10);
    }
  }
}

TEST_CASE("taylor formulas") {
  CHECK(f_dn_first(unit, 0.2, 0.5) == doctest::Approx(-0.02));
  CHECK(f_dn_first(unit, 0.0, 0.5) == 0.0);
  CHECK(f_dn_exact(unit, 0.05, 0.5) / f_true(unit, 0.5) == doctest::Approx(0.0024938).epsilon(1e-4));
  CHECK(f_dn_second(unit, 0.2, 0.5) == doctest::Approx(-0.0203046).epsilon(1e-5));
  CHECK(f_dn_second(unit, 0.1, 1.0) == doctest::Approx(f_dn_first(unit, 0.1, 1.0)));
  CHECK(f_dn_second(unit, 0.1, 1.0) == doctest::Approx(-0.01));
  CHECK(f_dn_second(dw, 0.3, 0.0) == 0.0);
  // curvature at r = 0 for the unit gaussian is -1: bracket 1 - sigma^2 / 2 vanishes at sqrt(2)
  CHECK_THROWS_AS(f_dn_second(unit, 1.5, 0.1), DomainError);
  CHECK(delta_dn(unit, 0.2, 0.5) == doctest::Approx(3.0e-4));
  CHECK(delta_dn(unit, 0.3, 1.0) < 1e-15);
  CHECK(delta_dn(unit, 0.3, 0.0) == 0.0);
}

TEST_CASE("sigma sweep on the double well") {
  const auto rep = sigma_sweep(dw, {0.3, 0.5, 1.5}, {0.2, 0.05, 0.1});
  CHECK(rep.sigmas == std::vector<double>{0.05, 0.1, 0.2});
  CHECK(rep.rows.size() == 9);
  CHECK(rep.fitted_rows == 9);
  CHECK(rep.slope == doctest::Approx(2.0).epsilon(0.15));
  CHECK(rep.rows[0].sigma == 0.05);
  CHECK(rep.rows[0].r == 0.3);
  CHECK(rep.rows[8].sigma == 0.2);
  for (const auto& row : rep.rows) {
    CHECK(std::isfinite(row.f_dn_exact));
    CHECK(row.f_dn_first == doctest::Approx(row.sigma * row.sigma * row.f_true));
  }
}

TEST_CASE("sigma sweep preconditions") {
  CHECK_THROWS_AS(sigma_sweep(dw, {0.5}, {0.1, 0.2}), InsufficientData);
  CHECK_THROWS_AS(sigma_sweep(dw, {}, {0.05, 0.1, 0.2}), InsufficientData);
  CHECK_THROWS_AS(sigma_sweep(dw, {0.5}, {0.1, 0.1, 0.2}), InvalidArgument);
  CHECK_THROWS_AS(sigma_sweep(dw, {0.5}, {0.0, 0.1, 0.2}), InvalidArgument);
  // F_true vanishes at 0 and at the minima, leaving nothing to fit
  CHECK_THROWS_AS(sigma_sweep(dw, {0.0, 1.0}, {0.05, 0.1, 0.2}), InsufficientData);
}

TEST_CASE("sweep csv") {
  const auto rep = sigma_sweep(dw, {0.5}, {0.05, 0.1, 0.2});
  std::ostringstream out;
  write_sweep_csv(out, rep);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "density,r,sigma,f_true,f_dn_exact,f_dn_first,f_dn_second,delta_dn");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    if (line.rfind("# slope=", 0) == 0) {
      last = line;
      break;
    }
    CHECK(std::count(line.begin(), line.end(), ',') == 7);
    ++rows;
  }
  CHECK(rows == 3);
  CHECK(std::stod(last.substr(8)) == doctest::Approx(rep.slope).epsilon(1e-12));
}

TEST_CASE("empirical denoiser") {
  CHECK_THROWS_AS(empirical_denoiser_1d(unit, 0.2, 999, 0.1, 1), InvalidArgument);

  const auto small = empirical_denoiser_1d(unit, 0.2, 100000, 0.1, 1);
  const auto big = empirical_denoiser_1d(unit, 0.2, 200000, 0.1, 1);
  RngStream rng(1, streams::kBootstrap);
  const std::vector<double> grid{-1.0, 0.0, 1.0, 20.0};
  const auto a = small.on_grid(grid, 200, rng);
  const auto b = big.on_grid(grid, 200, rng);
  CHECK(a.masked[3]);
  CHECK(std::isnan(a.value[3]));
  CHECK_FALSE(small(20.0).has_value());
  REQUIRE_FALSE(a.masked[1]);
  CHECK(std::abs(a.value[1]) < 3.0 * a.stderr_[1]);
  for (std::size_t p = 0; p < 3; ++p) {
    CHECK(std::abs(a.value[p] - f_dn_exact(unit, 0.2, grid[p])) < 3.0 * a.stderr_[p]);
    CHECK(a.stderr_[p] / b.stderr_[p] == doctest::Approx(std::sqrt(2.0)).epsilon(0.2));
  }
}

TEST_CASE("nadaraya watson on hand-made data") {
  EmpiricalDenoiser nw({0.0, 0.0, 0.0, 0.0, 0.0, 1.0}, {1.0, 1.0, 1.0, 1.0, 1.0, 7.0}, 0.01, 5.0);
  CHECK(nw(0.0).value() == doctest::Approx(1.0));
  CHECK_FALSE(nw(1.0).has_value());
  CHECK_THROWS_AS(EmpiricalDenoiser({0.0}, {}, 0.1), InvalidInput);
  CHECK_THROWS_AS(EmpiricalDenoiser({0.0}, {0.0}, 0.0), InvalidArgument);
}
