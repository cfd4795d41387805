#pragma once

#include <cmath>
#include <cstdint>

#include "gridloc/error.hpp"
#include "gridloc/neuro/net.hpp"

namespace gridloc::neuro {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <typename S>
struct AdamState {
  AdamConfig config;
  std::vector<Matrix<S>> m;
  std::vector<Matrix<S>> v;
  std::uint64_t step = 0;

  static AdamState create(const NetParams<S>& params, AdamConfig config = {}) {
    AdamState s{config, {}, {}, 0};
    for (const auto& t : params.tensors) {
      s.m.push_back(Matrix<S>::Zero(t.rows(), t.cols()));
      s.v.push_back(Matrix<S>::Zero(t.rows(), t.cols()));
    }
    return s;
  }
};

/// One bias-corrected Adam update. Non-finite gradients abort with a NumericalError
/// naming the first offending tensor and entry; params are left untouched then.
template <typename S>
void adam_step(NetParams<S>& params, const NetParams<S>& grads, AdamState<S>& state) {
  if (grads.tensors.size() != params.tensors.size() || state.m.size() != params.tensors.size())
    throw UsageError("adam: parameter/gradient/state tensor counts differ");
  for (std::size_t i = 0; i < grads.tensors.size(); ++i) {
    const auto& g = grads.tensors[i];
    if (g.rows() != params.tensors[i].rows() || g.cols() != params.tensors[i].cols())
      throw UsageError(fmt::format("adam: shape mismatch on {}", params.spec.tensors()[i].name));
    if (!g.allFinite()) {
      Eigen::Index r = 0, c = 0;
      for (Eigen::Index k = 0; k < g.size(); ++k)
        if (!std::isfinite(g.data()[k])) {
          r = k % g.rows();
          c = k / g.rows();
          break;
        }
      throw NumericalError(fmt::format("adam: non-finite gradient in {} at ({},{}) after {} steps: {}",
                                       params.spec.tensors()[i].name, r, c, state.step, static_cast<double>(g(r, c))));
    }
  }
  ++state.step;
  const auto& cfg = state.config;
  const double t = static_cast<double>(state.step);
  const S b1 = static_cast<S>(cfg.beta1), b2 = static_cast<S>(cfg.beta2);
  const S corr1 = static_cast<S>(1.0 - std::pow(cfg.beta1, t));
  const S corr2 = static_cast<S>(1.0 - std::pow(cfg.beta2, t));
  const S lr = static_cast<S>(cfg.lr), eps = static_cast<S>(cfg.eps);
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    const auto& g = grads.tensors[i];
    state.m[i] = b1 * state.m[i] + (S(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (S(1) - b2) * g.cwiseProduct(g);
    params.tensors[i].array() -=
        lr * (state.m[i].array() / corr1) / ((state.v[i].array() / corr2).sqrt() + eps);
  }
  ++params.version;
}

}  // namespace gridloc::neuro
