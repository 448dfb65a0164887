#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dnff/density.hpp"
#include "dnff/errors.hpp"
#include "dnff/rng.hpp"

namespace dnff {

inline constexpr double kQuadratureTolerance = 1e-10;

// rho'(r) / rho(r). Throws DomainError when rho(r) underflows.
double f_true(const AnalyticDensity1D& density, double r);

// Exact denoising force: mean of (r' - r) under rho(r') N(r' - r; sigma),
// by adaptive Gauss-Kronrod quadrature on r +/- (10 sigma + 5 scale) with
// absolute tolerance 1e-10. Throws NumericalError if the tolerance is not met.
double f_dn_exact(const AnalyticDensity1D& density, double sigma, double r);

// sigma^2 * f_true
double f_dn_first(const AnalyticDensity1D& density, double sigma, double r);

// sigma^2 f_true / (1 + rho''/rho sigma^2 / 2). DomainError if the bracket is <= 0.
double f_dn_second(const AnalyticDensity1D& density, double sigma, double r);

// |rho''/rho * sigma^4 * f_true| / 2
double delta_dn(const AnalyticDensity1D& density, double sigma, double r);

struct SweepRow {
  double r = 0.0;
  double sigma = 0.0;
  double f_true = 0.0;
  double f_dn_exact = 0.0;
  double f_dn_first = 0.0;
  double f_dn_second = 0.0;  // NaN where the second-order bracket is not positive
  double delta_dn = 0.0;
};

struct SweepReport {
  std::string density;
  std::vector<double> r_points;
  std::vector<double> sigmas;  // ascending
  std::vector<SweepRow> rows;  // sigma-major, r-minor
  double slope = 0.0;          // d log|F_DN/sigma^2 - F_true| / d log sigma, pooled over r
  std::size_t fitted_rows = 0;
};

// Fills every (sigma, r) cell and fits the pooled log-log slope. Rows with
// F_true = 0 or an exact match are left out of the fit; fewer than three
// usable rows raise InsufficientData.
SweepReport sigma_sweep(const AnalyticDensity1D& density, const std::vector<double>& r_points,
                        std::vector<double> sigmas);

void write_sweep_csv(std::ostream& out, const SweepReport& report);
void write_sweep_csv_file(const std::filesystem::path& path, const SweepReport& report);

struct GridEstimate {
  std::vector<double> grid;
  std::vector<double> value;   // NaN where masked
  std::vector<double> stderr_;  // bootstrap standard error, NaN where masked
  std::vector<bool> masked;
};

// Nadaraya-Watson regression of the target on the noised coordinate with a
// Gaussian kernel truncated at 5 bandwidths.
class EmpiricalDenoiser {
 public:
  EmpiricalDenoiser(std::vector<double> noised, std::vector<double> targets, double bandwidth,
                    double min_weight = 5.0);

  // nullopt when the kernel neighbourhood of r is (nearly) empty.
  std::optional<double> operator()(double r) const;
  GridEstimate on_grid(const std::vector<double>& grid, std::size_t n_bootstrap,
                       RngStream& rng) const;

  std::size_t size() const { return x_.size(); }
  double bandwidth() const { return h_; }

 private:
  std::vector<double> x_;  // sorted
  std::vector<double> y_;
  double h_;
  double min_weight_;
};

// Metropolis samples of the density, Gaussian noise of width sigma, and the
// regression of -N on the noised sample.
EmpiricalDenoiser empirical_denoiser_1d(const AnalyticDensity1D& density, double sigma,
                                        std::size_t n_samples, double bandwidth,
                                        std::uint64_t seed);

}  // namespace dnff
