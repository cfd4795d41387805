#include "gridloc/baseline.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/core.h>

#include "gridloc/error.hpp"
#include "gridloc/log.hpp"
#include "gridloc/neuro/adam.hpp"
#include "gridloc/neuro/loss.hpp"
#include "gridloc/random.hpp"

namespace gridloc {

Keypoint centroid(const Mask& mask) {
  double sr = 0.0, sc = 0.0;
  std::int64_t n = 0;
  for (Eigen::Index r = 0; r < mask.rows(); ++r)
    for (Eigen::Index c = 0; c < mask.cols(); ++c)
      if (mask(r, c) != 0) {
        sr += static_cast<double>(r);
        sc += static_cast<double>(c);
        ++n;
      }
  if (n == 0) throw DataError("centroid of an empty mask");
  const auto norm = [](Eigen::Index extent) { return extent > 1 ? static_cast<double>(extent - 1) : 1.0; };
  return {sr / n / norm(mask.rows()), sc / n / norm(mask.cols())};
}

AgentPos keypoint_block(const GridSpec& spec, Keypoint k) {
  const double r = std::clamp(k.row, 0.0, 1.0) * (spec.image_height - 1);
  const double c = std::clamp(k.col, 0.0, 1.0) * (spec.image_width - 1);
  return block_at(spec, r, c);
}

double keypoint_accuracy(const Dataset& ds, std::span<const Keypoint> predictions, int overlap_threshold) {
  if (ds.empty()) throw ConfigError("accuracy on an empty dataset");
  if (predictions.size() != ds.size())
    throw UsageError(fmt::format("{} predictions for {} cases", predictions.size(), ds.size()));
  int hits = 0;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (overlaps(ds.items[i].mask, ds.spec, keypoint_block(ds.spec, predictions[i]), overlap_threshold)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(ds.size());
}

void BaselineConfig::validate() const {
  if (epochs < 1) throw ConfigError(fmt::format("epochs must be >= 1, got {}", epochs));
  if (!(lr > 0.0)) throw ConfigError(fmt::format("lr must be > 0, got {}", lr));
  if (batch < 1) throw ConfigError(fmt::format("batch must be >= 1, got {}", batch));
  if (render_scale < 1) throw ConfigError(fmt::format("render_scale must be >= 1, got {}", render_scale));
  if (overlap_threshold < 1) throw ConfigError(fmt::format("overlap_threshold must be >= 1, got {}", overlap_threshold));
}

neuro::Matrix<float> keypoint_inputs(const Dataset& ds, int render_scale) {
  const int h = ds.spec.image_height / render_scale, w = ds.spec.image_width / render_scale;
  neuro::Matrix<float> x = neuro::Matrix<float>::Zero(static_cast<Eigen::Index>(h) * w * StateTensor::kChannels,
                                                      static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Image pooled = downscale(ds.items[i].image, render_scale);
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx) x((static_cast<Eigen::Index>(y) * w + xx) * StateTensor::kChannels, i) = pooled(y, xx);
  }
  return x;
}

neuro::Matrix<float> keypoint_targets(const Dataset& ds) {
  neuro::Matrix<float> t(2, static_cast<Eigen::Index>(ds.size()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Keypoint k = centroid(ds.items[i].mask);
    t(0, i) = static_cast<float>(k.row);
    t(1, i) = static_cast<float>(k.col);
  }
  return t;
}

std::vector<Keypoint> predict_keypoints(const neuro::NetParams<float>& params, const Dataset& ds, int render_scale) {
  const neuro::Matrix<float> out = neuro::forward(params, keypoint_inputs(ds, render_scale));
  std::vector<Keypoint> k(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) k[i] = {out(0, i), out(1, i)};
  return k;
}

double baseline_accuracy(const neuro::NetParams<float>& params, const Dataset& ds, int render_scale,
                         int overlap_threshold) {
  if (ds.empty()) throw ConfigError("accuracy on an empty dataset");
  const auto k = predict_keypoints(params, ds, render_scale);
  return keypoint_accuracy(ds, k, overlap_threshold);
}

Dataset usable_cases(const Dataset& ds) {
  Dataset out{ds.spec, {}};
  for (const Case& c : ds.items) {
    if ((c.mask != 0).any()) {
      out.items.push_back(c);
    } else {
      log_info("baseline: excluding {} (empty mask)", c.id);
    }
  }
  if (out.empty()) throw ConfigError("baseline: no training cases with a non-empty mask");
  return out;
}

namespace {

double full_loss(const neuro::NetParams<float>& params, const neuro::Matrix<float>& x, const neuro::Matrix<float>& t) {
  return neuro::mse_loss(neuro::Matrix<float>(neuro::forward(params, x)), t);
}

}  // namespace

BaselineResult train_baseline(const Dataset& train_in, const Dataset& test_in, const BaselineConfig& cfg,
                              const MetricsSink& sink) {
  cfg.validate();
  if (train_in.empty()) throw ConfigError("baseline: empty training set");
  if (test_in.empty()) throw ConfigError("baseline: empty test set");
  const Dataset train = usable_cases(train_in);
  const Dataset test = usable_cases(test_in);

  const neuro::NetSpec spec =
      neuro::NetSpec::keypoint(train.spec.image_height / cfg.render_scale, train.spec.image_width / cfg.render_scale);
  BaselineResult result{neuro::init_params<float>(spec, derive_seed(cfg.seed, seed_stream::kBaselineInit)), {}};
  auto& params = result.params;
  neuro::NetParams<float> grads = neuro::zero_params<float>(spec);
  neuro::AdamState<float> adam = neuro::AdamState<float>::create(params, {.lr = cfg.lr});
  neuro::Cache<float> cache;
  std::mt19937_64 rng(derive_seed(cfg.seed, seed_stream::kBaselineShuffle));

  const neuro::Matrix<float> x_train = keypoint_inputs(train, cfg.render_scale);
  const neuro::Matrix<float> t_train = keypoint_targets(train);
  const neuro::Matrix<float> x_test = keypoint_inputs(test, cfg.render_scale);
  const neuro::Matrix<float> t_test = keypoint_targets(test);

  const auto n = static_cast<Eigen::Index>(train.size());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (Eigen::Index b0 = 0; b0 < n; b0 += cfg.batch) {
      const Eigen::Index m = std::min<Eigen::Index>(cfg.batch, n - b0);
      neuro::Matrix<float> xb(x_train.rows(), m), tb(2, m);
      for (Eigen::Index j = 0; j < m; ++j) {
        xb.col(j) = x_train.col(order[static_cast<std::size_t>(b0 + j)]);
        tb.col(j) = t_train.col(order[static_cast<std::size_t>(b0 + j)]);
      }
      const neuro::Matrix<float> pred = neuro::forward(params, xb, &cache);
      neuro::Matrix<float> grad;
      const float loss = neuro::mse_loss(pred, tb, &grad);
      if (!std::isfinite(loss)) throw NumericalError(fmt::format("baseline: non-finite loss in epoch {}", epoch));
      neuro::backward(params, cache, grad, grads);
      neuro::adam_step(params, grads, adam);
    }
    BaselineEpoch e{epoch, full_loss(params, x_train, t_train), full_loss(params, x_test, t_test),
                    baseline_accuracy(params, test, cfg.render_scale, cfg.overlap_threshold)};
    log_debug("baseline epoch {:3d} train {:.5f} test {:.5f} acc {:.3f}", epoch, e.train_loss, e.test_loss,
              e.test_accuracy);
    result.history.push_back(e);
    if (sink) sink(MetricsRow{epoch, std::nullopt, std::nullopt, e.train_loss, e.test_accuracy});
  }
  return result;
}

int divergence_epoch(std::span<const BaselineEpoch> history, double ratio) {
  if (!(ratio > 1.0)) throw ConfigError(fmt::format("divergence ratio must be > 1, got {}", ratio));
  int epoch = 0;
  for (const auto& e : history) {
    if (e.test_loss > ratio * e.train_loss) {
      if (epoch == 0) epoch = e.epoch;
    } else {
      epoch = 0;
    }
  }
  return epoch;
}

std::string baseline_history_csv(std::span<const BaselineEpoch> history) {
  std::string out = "epoch,train_loss,test_loss,test_accuracy\n";
  for (const auto& e : history) out += fmt::format("{},{},{},{}\n", e.epoch, e.train_loss, e.test_loss, e.test_accuracy);
  return out;
}

}  // namespace gridloc
