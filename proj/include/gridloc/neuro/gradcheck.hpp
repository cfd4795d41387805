#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridloc/neuro/net.hpp"

namespace gridloc::neuro {

struct GradCheckOptions {
  double step = 1e-5;  // central-difference half-width
  /// Denominator guard of the relative error |a - n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  std::uint64_t seed = 1;
  /// 0 checks every entry; otherwise this many evenly spaced entries per tensor.
  std::int64_t max_per_tensor = 0;
  /// Double-precision differences carry round-off near 1e-10 absolute. Entries whose
  /// analytic gradient is smaller than this, or whose double result comes within a
  /// factor 10 of the tolerance, are re-differenced in long double.
  double extended_below = 1e-3;
};

struct TensorCheck {
  std::string name;
  std::int64_t checked = 0;
  std::int64_t extended = 0;  // entries differenced in long double
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  double max_abs_grad = 0.0;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Compares backward() against central finite differences of
/// J(params) = sum(forward(params, input) .* output_grad) in double precision.
/// Parameters are never mutated: the perturbed layer output is rebuilt from the
/// cached layer input and the rest of the net is re-run from there.
GradCheckReport gradient_check(const NetParams<double>& params, const Matrix<double>& input,
                               const Matrix<double>& output_grad, double tolerance, const GradCheckOptions& options = {});

/// Seeded random instance of `spec`: Kaiming weights, uniform [0,1) input,
/// standard-normal output_grad.
GradCheckReport gradient_check(const NetSpec& spec, double tolerance, const GradCheckOptions& options = {});

std::string format_report(const GradCheckReport& report);

}  // namespace gridloc::neuro
