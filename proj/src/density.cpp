#include "dnff/density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dnff/errors.hpp"

namespace dnff {

AnalyticDensity1D::AnalyticDensity1D(Family family, double p0, double p1, double p2)
    : family_(family), p0_(p0), p1_(p1), p2_(p2) {
  check_derivatives();
}

AnalyticDensity1D AnalyticDensity1D::gaussian(double mean, double stddev) {
  if (!(stddev > 0.0) || !std::isfinite(mean)) throw InvalidArgument("gaussian: stddev must be > 0");
  return AnalyticDensity1D(Family::Gaussian, mean, stddev, 0.0);
}

AnalyticDensity1D AnalyticDensity1D::double_well(double a, double b, double beta) {
  if (!(a > 0.0) || !(beta > 0.0) || !std::isfinite(b)) {
    throw InvalidArgument("double_well: a and beta must be > 0");
  }
  return AnalyticDensity1D(Family::DoubleWell, a, b, beta);
}

std::string AnalyticDensity1D::name() const {
  std::ostringstream s;
  if (family_ == Family::Gaussian) {
    s << "gaussian(" << p0_ << ";" << p1_ << ")";
  } else {
    s << "doublewell(" << p0_ << ";" << p1_ << ";" << p2_ << ")";
  }
  return s.str();
}

bool AnalyticDensity1D::symmetric_about_zero() const {
  return family_ == Family::DoubleWell || p0_ == 0.0;
}

double AnalyticDensity1D::log_rho(double r) const {
  if (family_ == Family::Gaussian) {
    const double z = (r - p0_) / p1_;
    return -0.5 * z * z;
  }
  const double u = r * r - p1_ * p1_;
  return -p2_ * p0_ * u * u;
}

double AnalyticDensity1D::rho(double r) const { return std::exp(log_rho(r)); }

double AnalyticDensity1D::score(double r) const {
  if (family_ == Family::Gaussian) return -(r - p0_) / (p1_ * p1_);
  // -beta dU/dr with U = a (r^2 - b^2)^2
  return -p2_ * 4.0 * p0_ * r * (r * r - p1_ * p1_);
}

double AnalyticDensity1D::curvature(double r) const {
  const double s = score(r);
  if (family_ == Family::Gaussian) return s * s - 1.0 / (p1_ * p1_);
  // (log rho)'' = -beta U''
  const double second = -p2_ * 4.0 * p0_ * (3.0 * r * r - p1_ * p1_);
  return s * s + second;
}

double AnalyticDensity1D::d1(double r) const { return score(r) * rho(r); }
double AnalyticDensity1D::d2(double r) const { return curvature(r) * rho(r); }

double AnalyticDensity1D::scale() const {
  if (family_ == Family::Gaussian) return p1_;
  return std::max(std::abs(p1_), std::pow(p2_ * p0_, -0.25));
}

double AnalyticDensity1D::mode() const {
  return family_ == Family::Gaussian ? p0_ : std::abs(p1_);
}

void AnalyticDensity1D::check_derivatives() const {
  // checked in log space: (log rho)' = score, (log rho)'' = curvature - score^2
  const double s = scale();
  const double h = 1e-3 * s;
  const double c = mode();
  for (double t : {-1.3, -0.6, -0.1, 0.35, 0.8, 1.4}) {
    const double r = c + t * s;
    const double l0 = log_rho(r);
    const double lp = log_rho(r + h);
    const double lm = log_rho(r - h);
    const double fd1 = (lp - lm) / (2.0 * h);
    const double fd2 = (lp - 2.0 * l0 + lm) / (h * h);
    const double an1 = score(r);
    const double an2 = curvature(r) - an1 * an1;
    if (std::abs(fd1 - an1) > 1e-5 * (std::abs(an1) + 1.0 / s) ||
        std::abs(fd2 - an2) > 1e-5 * (std::abs(an2) + 1.0 / (s * s))) {
      throw InvalidInput("AnalyticDensity1D: analytic derivatives disagree with finite differences for " +
                         name());
    }
  }
}

}  // namespace dnff
