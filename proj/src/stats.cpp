#include "gridloc/stats.hpp"

#include <cmath>

#include <boost/math/special_functions/beta.hpp>
#include <fmt/core.h>

#include "gridloc/error.hpp"

namespace gridloc {

double mean(std::span<const double> v) {
  if (v.empty()) throw UsageError("mean of an empty sample");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) throw UsageError("variance needs at least two values");
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

LineFit linfit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw UsageError(fmt::format("linfit: {} x values vs {} y values", x.size(), y.size()));
  if (x.size() < 2) throw ConfigError("linfit: need at least two points");
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ConfigError("linfit: all x values are equal");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

TTest t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw ConfigError("t_test: each sample needs at least two values");
  const double va = variance(a) / static_cast<double>(a.size());
  const double vb = variance(b) / static_cast<double>(b.size());
  const double diff = mean(a) - mean(b);
  if (va + vb == 0.0) throw ConfigError("t_test: both samples have zero variance");
  const double se2 = va + vb;
  const double t = diff / std::sqrt(se2);
  const double df = se2 * se2 / (va * va / static_cast<double>(a.size() - 1) + vb * vb / static_cast<double>(b.size() - 1));
  // Two-sided tail of Student's t: I_{df/(df+t^2)}(df/2, 1/2).
  const double p = t == 0.0 ? 1.0 : boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
  return {t, df, p};
}

}  // namespace gridloc
