#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gridloc/baseline.hpp"
#include "gridloc/config.hpp"
#include "gridloc/data_io.hpp"
#include "gridloc/metrics.hpp"
#include "gridloc/stats.hpp"

namespace gridloc {

struct MethodSummary {
  double last_mean = 0.0;  // mean test accuracy over the last `window` rows
  LineFit fit;             // accuracy against step, all rows
  int rows = 0;
};

struct Report {
  int window = 20;
  bool partial = false;
  std::optional<MethodSummary> dqn;
  std::optional<MethodSummary> supervised;
  std::optional<TTest> test;  // last-window DQN accuracies vs last-window supervised accuracies
  std::optional<int> divergence_epoch;
};

MethodSummary summarize(const RunMetrics& metrics, int window);

/// Either series may be null for a partial run. ConfigError naming "window" when a
/// series is shorter than the window.
Report report(const RunMetrics* dqn, const RunMetrics* supervised, int window = 20,
              std::optional<int> divergence_epoch = std::nullopt);
std::string report_text(const Report& r);

/// Output file names inside the run directory.
namespace artifact {
inline constexpr const char* kDqnMetrics = "dqn_metrics.csv";
inline constexpr const char* kSupervisedMetrics = "supervised_metrics.csv";
inline constexpr const char* kBaselineLoss = "baseline_loss.csv";
inline constexpr const char* kDqnCheckpoint = "dqn.glqn";
inline constexpr const char* kSupervisedCheckpoint = "supervised.glqn";
inline constexpr const char* kReport = "report.txt";
inline constexpr const char* kPlot = "comparison.svg";
inline constexpr const char* kConfig = "config.txt";
}  // namespace artifact

struct ExperimentData {
  Dataset train;
  Dataset test;
};

/// Reads <data>/train and <data>/test.
ExperimentData load_experiment_data(const RunConfig& cfg);

struct ExperimentResult {
  std::optional<RunMetrics> dqn;
  std::optional<RunMetrics> supervised;
  std::vector<BaselineEpoch> baseline_history;
  Report summary;
};

/// Trains the selected methods on the same split, then writes metrics, checkpoints,
/// loss curve, report, plot and the resolved config into cfg.out.
ExperimentResult run_experiment(const RunConfig& cfg, const ExperimentData& data);
ExperimentResult run_experiment(const RunConfig& cfg);

RunMetrics run_dqn(const RunConfig& cfg, const ExperimentData& data, neuro::NetParams<float>* params_out = nullptr);
BaselineResult run_supervised(const RunConfig& cfg, const ExperimentData& data, RunMetrics& metrics);

}  // namespace gridloc
