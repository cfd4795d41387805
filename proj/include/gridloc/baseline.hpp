#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gridloc/data_io.hpp"
#include "gridloc/metrics.hpp"
#include "gridloc/neuro/net.hpp"

namespace gridloc {

/// Normalized image coordinates, (0,0) top-left and (1,1) bottom-right pixel.
struct Keypoint {
  double row = 0.0;
  double col = 0.0;
};

/// Mean coordinate of nonzero pixels divided by (H-1, W-1). Empty mask: DataError.
Keypoint centroid(const Mask& mask);

/// Pixel block holding a normalized keypoint, after clipping to [0,1].
AgentPos keypoint_block(const GridSpec& spec, Keypoint k);

/// Fraction of cases whose predicted keypoint block overlaps the lesion.
double keypoint_accuracy(const Dataset& ds, std::span<const Keypoint> predictions, int overlap_threshold = 1);

struct BaselineConfig {
  int epochs = 90;
  double lr = 1e-4;
  int batch = 16;
  std::uint64_t seed = 0;
  int render_scale = 1;
  int overlap_threshold = 1;

  void validate() const;
};

/// Network input for each case, one column per image: the pooled image in channel 0
/// and an empty agent channel, so the backbone matches the DQN's.
neuro::Matrix<float> keypoint_inputs(const Dataset& ds, int render_scale);
/// 2 x N normalized centroids.
neuro::Matrix<float> keypoint_targets(const Dataset& ds);

std::vector<Keypoint> predict_keypoints(const neuro::NetParams<float>& params, const Dataset& ds, int render_scale);
double baseline_accuracy(const neuro::NetParams<float>& params, const Dataset& ds, int render_scale,
                         int overlap_threshold = 1);

struct BaselineEpoch {
  int epoch = 0;
  double train_loss = 0.0;  // full-pass MSE after the epoch's updates
  double test_loss = 0.0;
  double test_accuracy = 0.0;
};

struct BaselineResult {
  neuro::NetParams<float> params;
  std::vector<BaselineEpoch> history;
};

/// Drops cases with empty masks (logged), ConfigError if nothing remains.
Dataset usable_cases(const Dataset& ds);

/// MSE keypoint regression with Adam; one metrics row per epoch.
BaselineResult train_baseline(const Dataset& train, const Dataset& test, const BaselineConfig& cfg,
                              const MetricsSink& sink = {});

/// First epoch from which test loss stays above `ratio` times training loss through
/// the end of the run; 0 if the curves never separate.
int divergence_epoch(std::span<const BaselineEpoch> history, double ratio = 2.0);

/// CSV "epoch,train_loss,test_loss,test_accuracy".
std::string baseline_history_csv(std::span<const BaselineEpoch> history);

}  // namespace gridloc
