#pragma once

#include <cmath>

#include "gridloc/error.hpp"
#include "gridloc/neuro/net.hpp"

namespace gridloc::neuro {

namespace detail {
template <typename S>
void check_pair(const Matrix<S>& pred, const Matrix<S>& target) {
  if (pred.cols() == 0) throw UsageError("loss: empty batch");
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw UsageError(fmt::format("loss: prediction {}x{} vs target {}x{}", pred.rows(), pred.cols(), target.rows(), target.cols()));
}
}  // namespace detail

/// Mean over samples (columns) of the summed absolute error. With `grad`, also the
/// derivative w.r.t. pred (sign / N; zero where pred == target).
template <typename S>
S l1_batch_loss(const Matrix<S>& pred, const Matrix<S>& target, Matrix<S>* grad = nullptr) {
  detail::check_pair(pred, target);
  const S n = static_cast<S>(pred.cols());
  if (grad != nullptr)
    *grad = (pred - target).unaryExpr([n](S d) { return d > S(0) ? S(1) / n : (d < S(0) ? S(-1) / n : S(0)); });
  return (pred - target).cwiseAbs().sum() / n;
}

/// Mean squared error over every entry.
template <typename S>
S mse_loss(const Matrix<S>& pred, const Matrix<S>& target, Matrix<S>* grad = nullptr) {
  detail::check_pair(pred, target);
  const S count = static_cast<S>(pred.size());
  if (grad != nullptr) *grad = (pred - target) * (S(2) / count);
  return (pred - target).squaredNorm() / count;
}

}  // namespace gridloc::neuro
