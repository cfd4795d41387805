#include "gridloc/neuro/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace gridloc::neuro {
namespace {

using Mat = Matrix<double>;
using Ext = long double;

/// J with entry (row, col) of a layer's weight (or bias) shifted by `delta`,
/// evaluated from the cached input of the owning layer onward.
template <typename S>
S shifted_objective(const NetParams<S>& p, const Cache<S>& cache, const Matrix<S>& output_grad, std::size_t layer,
                    bool bias, Eigen::Index row, Eigen::Index col, S delta) {
  const LayerSpec& l = p.spec.layers()[layer];
  Matrix<S> z = cache.activations[layer + 1];
  const Eigen::Index batch = z.cols();
  if (l.kind == LayerKind::Dense) {
    for (Eigen::Index n = 0; n < batch; ++n) z(row, n) += bias ? delta : delta * cache.activations[layer](col, n);
  } else {
    const Matrix<S>& cols = cache.cols[layer];
    const Eigen::Index positions = static_cast<Eigen::Index>(l.out.h) * l.out.w;
    for (Eigen::Index n = 0; n < batch; ++n)
      for (Eigen::Index pos = 0; pos < positions; ++pos)
        z(pos * l.out.c + row, n) += bias ? delta : delta * cols(col, n * positions + pos);
  }
  const Matrix<S> out = forward_from(p, layer + 1, std::move(z));
  return out.cwiseProduct(output_grad).sum();
}

}  // namespace

GradCheckReport gradient_check(const NetParams<double>& params, const Mat& input, const Mat& output_grad, double tolerance,
                               const GradCheckOptions& options) {
  Cache<double> cache;
  forward(params, input, &cache);
  NetParams<double> analytic;
  backward(params, cache, output_grad, analytic);
  const NetParams<Ext> ext = params.cast<Ext>();
  const Matrix<Ext> ext_grad = output_grad.cast<Ext>();
  Cache<Ext> ext_cache;
  forward(ext, Matrix<Ext>(input.cast<Ext>()), &ext_cache);

  GradCheckReport report;
  report.tolerance = tolerance;
  const auto& layers = params.spec.layers();
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const LayerSpec& l = layers[li];
    if (!l.has_params()) continue;
    for (int which = 0; which < 2; ++which) {
      const bool bias = which == 1;
      const int ti = l.tensor_index + which;
      const Mat& g = analytic.tensors[ti];
      TensorCheck tc;
      tc.name = params.spec.tensors()[ti].name;
      const Eigen::Index total = g.size();
      const Eigen::Index count =
          options.max_per_tensor > 0 ? std::min<Eigen::Index>(total, options.max_per_tensor) : total;
      for (Eigen::Index s = 0; s < count; ++s) {
        const Eigen::Index k = count == total ? s : (s * total) / count;
        const Eigen::Index row = k % g.rows(), col = k / g.rows();
        const double a = g(row, col);
        const double h = options.step;
        double numeric = (shifted_objective(params, cache, output_grad, li, bias, row, col, h) -
                          shifted_objective(params, cache, output_grad, li, bias, row, col, -h)) /
                         (2.0 * h);
        const auto rel_error = [&](double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), options.floor}); };
        if (std::abs(a) < options.extended_below || rel_error(numeric) > 0.1 * tolerance) {
          const Ext he = h;
          numeric = static_cast<double>((shifted_objective(ext, ext_cache, ext_grad, li, bias, row, col, he) -
                                         shifted_objective(ext, ext_cache, ext_grad, li, bias, row, col, -he)) /
                                        (2 * he));
          ++tc.extended;
        }
        const double abs_err = std::abs(a - numeric);
        const double rel = rel_error(numeric);
        tc.max_abs_error = std::max(tc.max_abs_error, abs_err);
        tc.max_rel_error = std::max(tc.max_rel_error, rel);
        tc.max_abs_grad = std::max(tc.max_abs_grad, std::abs(a));
        ++tc.checked;
      }
      report.max_rel_error = std::max(report.max_rel_error, tc.max_rel_error);
      report.tensors.push_back(std::move(tc));
    }
  }
  report.passed = report.max_rel_error < tolerance;
  return report;
}

GradCheckReport gradient_check(const NetSpec& spec, double tolerance, const GradCheckOptions& options) {
  const auto params = init_params<double>(spec, options.seed);
  std::mt19937_64 rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat input(spec.input_size(), 1);
  for (Eigen::Index i = 0; i < input.size(); ++i) input(i) = uni(rng);
  Mat output_grad(spec.output_size(), 1);
  for (Eigen::Index i = 0; i < output_grad.size(); ++i) output_grad(i) = normal(rng);
  return gradient_check(params, input, output_grad, tolerance, options);
}

std::string format_report(const GradCheckReport& report) {
  std::string out;
  for (const auto& t : report.tensors)
    out += fmt::format("{:<14} checked {:>7} ({:>6} extended)  max|grad| {:.3e}  max abs err {:.3e}  max rel err {:.3e}\n",
                       t.name, t.checked, t.extended, t.max_abs_grad, t.max_abs_error, t.max_rel_error);
  out += fmt::format("overall max rel err {:.3e} (tolerance {:.1e}): {}\n", report.max_rel_error, report.tolerance,
                     report.passed ? "PASS" : "FAIL");
  return out;
}

}  // namespace gridloc::neuro
