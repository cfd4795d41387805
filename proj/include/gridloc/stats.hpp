#pragma once

#include <span>
#include <vector>

namespace gridloc {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

/// Ordinary least squares y = slope * x + intercept. Needs two distinct x values.
LineFit linfit(std::span<const double> x, std::span<const double> y);

struct TTest {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

/// Welch's unequal-variance two-sample t-test.
TTest t_test(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);
/// Unbiased sample variance.
double variance(std::span<const double> v);

}  // namespace gridloc
