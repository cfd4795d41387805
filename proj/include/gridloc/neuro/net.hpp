#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <fmt/core.h>

#include "gridloc/error.hpp"
#include "gridloc/neuro/spec.hpp"

namespace gridloc::neuro {

template <typename S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <typename S>
S elu(S x) {
  return x > S(0) ? x : std::expm1(x);
}

/// Derivative of elu expressed through its output: 1 for y > 0, y + 1 otherwise.
template <typename S>
S elu_grad_from_output(S y) {
  return y > S(0) ? S(1) : y + S(1);
}

/// All weights and biases of a network. Also used to hold gradients and Adam moments.
template <typename S>
struct NetParams {
  NetSpec spec;
  std::vector<Matrix<S>> tensors;
  /// Bumped by every optimizer update; forward caches remember the value they saw.
  std::uint64_t version = 0;

  Matrix<S>& weight(const LayerSpec& l) { return tensors[l.tensor_index]; }
  const Matrix<S>& weight(const LayerSpec& l) const { return tensors[l.tensor_index]; }
  Matrix<S>& bias(const LayerSpec& l) { return tensors[l.tensor_index + 1]; }
  const Matrix<S>& bias(const LayerSpec& l) const { return tensors[l.tensor_index + 1]; }

  bool all_finite() const {
    for (const auto& t : tensors)
      if (!t.allFinite()) return false;
    return true;
  }

  template <typename T>
  NetParams<T> cast() const {
    NetParams<T> out{spec, {}, version};
    out.tensors.reserve(tensors.size());
    for (const auto& t : tensors) out.tensors.push_back(t.template cast<T>());
    return out;
  }
};

template <typename S>
NetParams<S> zero_params(const NetSpec& spec) {
  NetParams<S> p{spec, {}, 0};
  for (const auto& t : spec.tensors()) p.tensors.push_back(Matrix<S>::Zero(t.rows, t.cols));
  return p;
}

/// Kaiming-normal weights (std sqrt(2 / fan_in)) from a seeded generator, zero biases.
/// The draw sequence is independent of S, so float and double nets from one seed agree.
template <typename S>
NetParams<S> init_params(const NetSpec& spec, std::uint64_t seed) {
  NetParams<S> p = zero_params<S>(spec);
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < p.tensors.size(); ++i) {
    const auto& info = spec.tensors()[i];
    if (info.is_bias) continue;
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / info.fan_in));
    auto& w = p.tensors[i];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = static_cast<S>(dist(rng));
  }
  return p;
}

/// Per-layer activations from a forward pass, needed by backward().
template <typename S>
struct Cache {
  std::vector<Matrix<S>> activations;  // [i] = input of layer i; back() = network output
  std::vector<Matrix<S>> cols;         // im2col buffers of conv layers (empty otherwise)
  mutable Matrix<S> delta, next_delta, dcols;  // backward scratch
  std::uint64_t params_version = 0;
  const NetSpec* spec = nullptr;
};

namespace detail {

template <typename S>
void im2col(const Matrix<S>& x, const Shape3& in, const Shape3& out, Matrix<S>& cols) {
  const Eigen::Index n = x.cols();
  const Eigen::Index positions = static_cast<Eigen::Index>(out.h) * out.w;
  cols.setZero(kKernel * kKernel * in.c, positions * n);
  for (Eigen::Index s = 0; s < n; ++s) {
    const S* src = x.col(s).data();
    for (int oy = 0; oy < out.h; ++oy)
      for (int ox = 0; ox < out.w; ++ox) {
        S* dst = cols.col(s * positions + oy * out.w + ox).data();
        for (int ky = 0; ky < kKernel; ++ky) {
          const int iy = kStride * oy - 1 + ky;
          if (iy < 0 || iy >= in.h) continue;
          for (int kx = 0; kx < kKernel; ++kx) {
            const int ix = kStride * ox - 1 + kx;
            if (ix < 0 || ix >= in.w) continue;
            std::copy_n(src + (static_cast<Eigen::Index>(iy) * in.w + ix) * in.c, in.c, dst + (ky * kKernel + kx) * in.c);
          }
        }
      }
  }
}

template <typename S>
void col2im(const Matrix<S>& dcols, const Shape3& in, const Shape3& out, Matrix<S>& dx) {
  const Eigen::Index n = dx.cols();
  const Eigen::Index positions = static_cast<Eigen::Index>(out.h) * out.w;
  for (Eigen::Index s = 0; s < n; ++s) {
    S* dst = dx.col(s).data();
    for (int oy = 0; oy < out.h; ++oy)
      for (int ox = 0; ox < out.w; ++ox) {
        const S* src = dcols.col(s * positions + oy * out.w + ox).data();
        for (int ky = 0; ky < kKernel; ++ky) {
          const int iy = kStride * oy - 1 + ky;
          if (iy < 0 || iy >= in.h) continue;
          for (int kx = 0; kx < kKernel; ++kx) {
            const int ix = kStride * ox - 1 + kx;
            if (ix < 0 || ix >= in.w) continue;
            S* d = dst + (static_cast<Eigen::Index>(iy) * in.w + ix) * in.c;
            const S* g = src + (ky * kKernel + kx) * in.c;
            for (int c = 0; c < in.c; ++c) d[c] += g[c];
          }
        }
      }
  }
}

/// Writes the output of one layer into `y`, reusing its storage when the shape is
/// unchanged. Conv layers leave their im2col matrix in `cols`.
template <typename S>
void apply_layer(const NetParams<S>& p, const LayerSpec& l, const Matrix<S>& x, Matrix<S>& y, Matrix<S>& cols) {
  const Eigen::Index n = x.cols();
  y.resize(l.out.size(), n);
  switch (l.kind) {
    case LayerKind::Conv: {
      im2col(x, l.in, l.out, cols);
      Eigen::Map<Matrix<S>> z(y.data(), l.out.c, static_cast<Eigen::Index>(l.out.h) * l.out.w * n);
      z.noalias() = p.weight(l) * cols;
      z.colwise() += p.bias(l).col(0);
      break;
    }
    case LayerKind::Dense:
      y.noalias() = p.weight(l) * x;
      y.colwise() += p.bias(l).col(0);
      break;
    case LayerKind::Elu:
      // max(x,0) + exp(min(x,0)) - 1 == elu(x); unlike select() this vectorizes.
      y.array() = x.array().cwiseMax(S(0)) + (x.array().cwiseMin(S(0)).exp() - S(1));
      break;
    case LayerKind::Flatten:
      y = x;
      break;
  }
}

template <typename S>
void check_input(const NetSpec& spec, Eigen::Index rows) {
  if (rows != spec.input_size())
    throw ConfigError(fmt::format("forward: input has {} rows, network expects {}", rows, spec.input_size()));
}

}  // namespace detail

/// Batched forward pass; each column of `input` is one HWC sample. Pass a cache to
/// enable backward(); a cache reused across calls keeps its buffers.
template <typename S>
Matrix<S> forward(const NetParams<S>& p, const Matrix<S>& input, Cache<S>* cache = nullptr) {
  detail::check_input<S>(p.spec, input.rows());
  const auto& layers = p.spec.layers();
  if (cache == nullptr) {
    Matrix<S> x = input, y, cols;
    for (const auto& l : layers) {
      detail::apply_layer(p, l, x, y, cols);
      x.swap(y);
    }
    return x;
  }
  cache->spec = &p.spec;
  cache->params_version = p.version;
  cache->activations.resize(layers.size() + 1);
  cache->cols.resize(layers.size());
  cache->activations[0] = input;
  for (std::size_t i = 0; i < layers.size(); ++i)
    detail::apply_layer(p, layers[i], cache->activations[i], cache->activations[i + 1], cache->cols[i]);
  return cache->activations.back();
}

/// Runs layers [first, end) on an activation that is the input of layer `first`.
template <typename S>
Matrix<S> forward_from(const NetParams<S>& p, std::size_t first, Matrix<S> x) {
  Matrix<S> y, cols;
  const auto& layers = p.spec.layers();
  for (std::size_t i = first; i < layers.size(); ++i) {
    detail::apply_layer(p, layers[i], x, y, cols);
    x.swap(y);
  }
  return x;
}

template <typename S>
Vector<S> forward_one(const NetParams<S>& p, const Vector<S>& input) {
  return forward<S>(p, Matrix<S>(input), nullptr).col(0);
}

/// Gradients of sum(output .* output_grad) with respect to every parameter, written
/// into `grads` (overwritten, or added to when `accumulate`).
template <typename S>
void backward(const NetParams<S>& p, const Cache<S>& cache, const Matrix<S>& output_grad, NetParams<S>& grads,
              bool accumulate = false) {
  const auto& layers = p.spec.layers();
  if (cache.spec == nullptr || cache.activations.size() != layers.size() + 1 || !(*cache.spec == p.spec))
    throw UsageError("backward: cache does not come from a forward pass of this network");
  if (cache.params_version != p.version)
    throw UsageError(fmt::format("backward: stale cache (params version {} vs cache {})", p.version, cache.params_version));
  const Eigen::Index n = cache.activations.back().cols();
  if (output_grad.rows() != p.spec.output_size() || output_grad.cols() != n)
    throw UsageError(fmt::format("backward: output_grad is {}x{}, expected {}x{}", output_grad.rows(), output_grad.cols(),
                                 p.spec.output_size(), n));
  if (grads.tensors.size() != p.tensors.size()) grads = zero_params<S>(p.spec);
  else if (!accumulate)
    for (auto& t : grads.tensors) t.setZero();

  Matrix<S>& delta = cache.delta;
  Matrix<S>& dx = cache.next_delta;
  delta = output_grad;
  for (std::size_t idx = layers.size(); idx-- > 0;) {
    const LayerSpec& l = layers[idx];
    const Matrix<S>& x = cache.activations[idx];
    switch (l.kind) {
      case LayerKind::Elu: {
        const Matrix<S>& y = cache.activations[idx + 1];
        delta.array() *= y.array().cwiseMin(S(0)) + S(1);
        break;
      }
      case LayerKind::Flatten: break;
      case LayerKind::Dense: {
        grads.weight(l).noalias() += delta * x.transpose();
        grads.bias(l).col(0) += delta.rowwise().sum();
        if (idx > 0) {
          dx.resize(l.in.size(), n);
          dx.noalias() = p.weight(l).transpose() * delta;
          delta.swap(dx);
        }
        break;
      }
      case LayerKind::Conv: {
        const Eigen::Index cols_n = static_cast<Eigen::Index>(l.out.h) * l.out.w * n;
        Eigen::Map<const Matrix<S>> dz(delta.data(), l.out.c, cols_n);
        const Matrix<S>& cols = cache.cols[idx];
        grads.weight(l).noalias() += dz * cols.transpose();
        grads.bias(l).col(0) += dz.rowwise().sum();
        if (idx > 0) {
          cache.dcols.resize(cols.rows(), cols_n);
          cache.dcols.noalias() = p.weight(l).transpose() * dz;
          dx.setZero(l.in.size(), n);
          detail::col2im(cache.dcols, l.in, l.out, dx);
          delta.swap(dx);
        }
        break;
      }
    }
  }
}

}  // namespace gridloc::neuro
