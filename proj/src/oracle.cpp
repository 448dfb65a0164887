#include "dnff/oracle.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <ostream>

#include "dnff/errors.hpp"
#include "dnff/extxyz.hpp"
#include "dnff/sampler.hpp"

namespace dnff {

namespace {

constexpr std::size_t kWorkspaceIntervals = 2000;

struct WorkspaceDeleter {
  void operator()(gsl_integration_workspace* w) const { gsl_integration_workspace_free(w); }
};

template <typename F>
double integrate(F& f, double lo, double hi) {
  static const bool handler_off = [] {
    gsl_set_error_handler_off();
    return true;
  }();
  (void)handler_off;
  std::unique_ptr<gsl_integration_workspace, WorkspaceDeleter> ws(
      gsl_integration_workspace_alloc(kWorkspaceIntervals));
  gsl_function fn;
  fn.function = [](double x, void* p) { return (*static_cast<F*>(p))(x); };
  fn.params = &f;
  double result = 0.0;
  double abserr = 0.0;
  const int status = gsl_integration_qag(&fn, lo, hi, kQuadratureTolerance, 0.0,
                                         kWorkspaceIntervals, GSL_INTEG_GAUSS61, ws.get(),
                                         &result, &abserr);
  if (status != GSL_SUCCESS) {
    throw NumericalError(std::string("quadrature did not converge: ") + gsl_strerror(status),
                         abserr);
  }
  return result;
}

}  // namespace

double f_true(const AnalyticDensity1D& density, double r) {
  if (!(density.rho(r) > 0.0)) {
    throw DomainError("f_true: density underflows at r = " + std::to_string(r));
  }
  return density.score(r);
}

double f_dn_exact(const AnalyticDensity1D& density, double sigma, double r) {
  if (!(sigma > 0.0)) throw InvalidArgument("f_dn_exact: sigma must be > 0");
  const double half_width = 10.0 * sigma + 5.0 * density.scale();
  const double log_ref = density.log_rho(r);
  const double norm = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
  auto weight = [&](double x) {
    const double z = (x - r) / sigma;
    return norm * std::exp(density.log_rho(x) - log_ref - 0.5 * z * z);
  };
  auto first_moment = [&](double x) { return (x - r) * weight(x); };
  const double lo = r - half_width;
  const double hi = r + half_width;
  const double numerator = integrate(first_moment, lo, hi);
  const double denominator = integrate(weight, lo, hi);
  if (!(denominator > 0.0)) throw NumericalError("f_dn_exact: vanishing normalization", denominator);
  return numerator / denominator;
}

double f_dn_first(const AnalyticDensity1D& density, double sigma, double r) {
  if (!(sigma >= 0.0)) throw InvalidArgument("f_dn_first: sigma must be >= 0");
  return sigma * sigma * f_true(density, r);
}

double f_dn_second(const AnalyticDensity1D& density, double sigma, double r) {
  const double ft = f_true(density, r);
  const double bracket = 1.0 + 0.5 * density.curvature(r) * sigma * sigma;
  if (!(bracket > 0.0)) {
    throw DomainError("f_dn_second: 1 + rho''/(2 rho) sigma^2 <= 0 at r = " + std::to_string(r) +
                      ", sigma = " + std::to_string(sigma));
  }
  return sigma * sigma * ft / bracket;
}

double delta_dn(const AnalyticDensity1D& density, double sigma, double r) {
  const double ft = f_true(density, r);
  const double s2 = sigma * sigma;
  return std::abs(0.5 * density.curvature(r) * s2 * s2 * ft);
}

SweepReport sigma_sweep(const AnalyticDensity1D& density, const std::vector<double>& r_points,
                        std::vector<double> sigmas) {
  std::sort(sigmas.begin(), sigmas.end());
  if (std::adjacent_find(sigmas.begin(), sigmas.end()) != sigmas.end()) {
    throw InvalidArgument("sigma_sweep: sigmas must be distinct");
  }
  if (sigmas.size() < 3) throw InsufficientData("sigma_sweep: need at least 3 sigmas");
  if (!(sigmas.front() > 0.0)) throw InvalidArgument("sigma_sweep: sigmas must be > 0");
  if (r_points.empty()) throw InsufficientData("sigma_sweep: no evaluation points");

  SweepReport report;
  report.density = density.name();
  report.r_points = r_points;
  report.sigmas = sigmas;
  std::vector<double> xs, ys;
  for (double sigma : sigmas) {
    for (double r : r_points) {
      SweepRow row;
      row.r = r;
      row.sigma = sigma;
      row.f_true = f_true(density, r);
      row.f_dn_exact = f_dn_exact(density, sigma, r);
      row.f_dn_first = f_dn_first(density, sigma, r);
      try {
        row.f_dn_second = f_dn_second(density, sigma, r);
      } catch (const DomainError&) {
        row.f_dn_second = std::numeric_limits<double>::quiet_NaN();
      }
      row.delta_dn = delta_dn(density, sigma, r);
      report.rows.push_back(row);

      const double gap = std::abs(row.f_dn_exact / (sigma * sigma) - row.f_true);
      if (row.f_true != 0.0 && gap > 0.0 && std::isfinite(gap)) {
        xs.push_back(std::log(sigma));
        ys.push_back(std::log(gap));
      }
    }
  }
  if (xs.size() < 3) {
    throw InsufficientData("sigma_sweep: fewer than 3 usable (r, sigma) rows for the slope fit");
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxy += (xs[k] - mx) * (ys[k] - my);
    sxx += (xs[k] - mx) * (xs[k] - mx);
  }
  report.slope = sxy / sxx;
  report.fitted_rows = xs.size();
  return report;
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "density,r,sigma,f_true,f_dn_exact,f_dn_first,f_dn_second,delta_dn\n";
  for (const auto& row : report.rows) {
    out << report.density << ',' << format_double(row.r) << ',' << format_double(row.sigma) << ','
        << format_double(row.f_true) << ',' << format_double(row.f_dn_exact) << ','
        << format_double(row.f_dn_first) << ',' << format_double(row.f_dn_second) << ','
        << format_double(row.delta_dn) << '\n';
  }
  out << "# slope=" << format_double(report.slope) << '\n';
}

void write_sweep_csv_file(const std::filesystem::path& path, const SweepReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open '" + path.string() + "' for writing");
  write_sweep_csv(out, report);
}

EmpiricalDenoiser::EmpiricalDenoiser(std::vector<double> noised, std::vector<double> targets,
                                     double bandwidth, double min_weight)
    : h_(bandwidth), min_weight_(min_weight) {
  if (noised.size() != targets.size()) throw InvalidInput("denoiser: sample/target size mismatch");
  if (!(bandwidth > 0.0)) throw InvalidArgument("denoiser: bandwidth must be > 0");
  std::vector<std::size_t> order(noised.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return noised[a] < noised[b]; });
  x_.reserve(order.size());
  y_.reserve(order.size());
  for (auto k : order) {
    x_.push_back(noised[k]);
    y_.push_back(targets[k]);
  }
}

std::optional<double> EmpiricalDenoiser::operator()(double r) const {
  const auto lo = std::lower_bound(x_.begin(), x_.end(), r - 5.0 * h_) - x_.begin();
  const auto hi = std::upper_bound(x_.begin(), x_.end(), r + 5.0 * h_) - x_.begin();
  double num = 0.0, den = 0.0;
  for (auto k = lo; k < hi; ++k) {
    const double z = (x_[k] - r) / h_;
    const double w = std::exp(-0.5 * z * z);
    num += w * y_[k];
    den += w;
  }
  if (den < min_weight_) return std::nullopt;
  return num / den;
}

GridEstimate EmpiricalDenoiser::on_grid(const std::vector<double>& grid, std::size_t n_bootstrap,
                                        RngStream& rng) const {
  GridEstimate out;
  out.grid = grid;
  const std::size_t g = grid.size();
  out.value.assign(g, std::numeric_limits<double>::quiet_NaN());
  out.stderr_.assign(g, std::numeric_limits<double>::quiet_NaN());
  out.masked.assign(g, true);

  std::vector<std::size_t> lo(g), hi(g);
  std::vector<std::vector<double>> weights(g);
  for (std::size_t p = 0; p < g; ++p) {
    lo[p] = static_cast<std::size_t>(std::lower_bound(x_.begin(), x_.end(), grid[p] - 5.0 * h_) -
                                     x_.begin());
    hi[p] = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), grid[p] + 5.0 * h_) -
                                     x_.begin());
    double num = 0.0, den = 0.0;
    weights[p].reserve(hi[p] - lo[p]);
    for (std::size_t k = lo[p]; k < hi[p]; ++k) {
      const double z = (x_[k] - grid[p]) / h_;
      const double w = std::exp(-0.5 * z * z);
      weights[p].push_back(w);
      num += w * y_[k];
      den += w;
    }
    if (den >= min_weight_) {
      out.masked[p] = false;
      out.value[p] = num / den;
    }
  }
  if (n_bootstrap < 2) return out;

  const std::size_t n = x_.size();
  std::vector<double> counts(n);
  std::vector<double> sum(g, 0.0), sum2(g, 0.0);
  std::vector<std::size_t> valid(g, 0);
  for (std::size_t b = 0; b < n_bootstrap; ++b) {
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) counts[rng.next_u64() % n] += 1.0;
    for (std::size_t p = 0; p < g; ++p) {
      if (out.masked[p]) continue;
      double num = 0.0, den = 0.0;
      for (std::size_t k = lo[p]; k < hi[p]; ++k) {
        const double w = counts[k] * weights[p][k - lo[p]];
        num += w * y_[k];
        den += w;
      }
      if (den <= 0.0) continue;
      const double est = num / den;
      sum[p] += est;
      sum2[p] += est * est;
      ++valid[p];
    }
  }
  for (std::size_t p = 0; p < g; ++p) {
    if (out.masked[p] || valid[p] < 2) continue;
    const double m = sum[p] / valid[p];
    const double var = (sum2[p] - valid[p] * m * m) / (valid[p] - 1);
    out.stderr_[p] = std::sqrt(std::max(var, 0.0));
  }
  return out;
}

EmpiricalDenoiser empirical_denoiser_1d(const AnalyticDensity1D& density, double sigma,
                                        std::size_t n_samples, double bandwidth,
                                        std::uint64_t seed) {
  if (n_samples < 1000) throw InvalidArgument("empirical_denoiser_1d: need at least 1000 samples");
  if (!(sigma > 0.0)) throw InvalidArgument("empirical_denoiser_1d: sigma must be > 0");
  RngStream chain(seed, streams::kMetropolis);
  const auto samples = mc_sample_1d(density, n_samples, 2.5 * density.scale(), chain);
  RngStream noise(seed, streams::kNoise);
  std::vector<double> noised(n_samples), targets(n_samples);
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double eps = sigma * noise.normal();
    noised[k] = samples[k] + eps;
    targets[k] = -eps;
  }
  return EmpiricalDenoiser(std::move(noised), std::move(targets), bandwidth);
}

}  // namespace dnff
