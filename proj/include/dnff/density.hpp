#pragma once

#include <string>

namespace dnff {

// Unnormalized 1D densities with analytic first and second derivatives.
// Everything is computed from log rho so ratios stay finite far in the tails.
class AnalyticDensity1D {
 public:
  enum class Family { Gaussian, DoubleWell };

  // rho(r) = exp(-(r - mean)^2 / (2 std^2))
  static AnalyticDensity1D gaussian(double mean, double stddev);
  // rho(r) = exp(-beta * a * (r^2 - b^2)^2)
  static AnalyticDensity1D double_well(double a, double b, double beta);

  Family family() const { return family_; }
  std::string name() const;
  bool symmetric_about_zero() const;

  double log_rho(double r) const;
  double rho(double r) const;
  double d1(double r) const;  // rho'
  double d2(double r) const;  // rho''
  double score(double r) const;      // rho'/rho
  double curvature(double r) const;  // rho''/rho
  // Characteristic length used to size integration windows.
  double scale() const;
  // A high-density point to start Markov chains from.
  double mode() const;

 private:
  AnalyticDensity1D(Family family, double p0, double p1, double p2);
  void check_derivatives() const;

  Family family_;
  double p0_, p1_, p2_;  // Gaussian: (mean, std, -); DoubleWell: (a, b, beta)
};

}  // namespace dnff
