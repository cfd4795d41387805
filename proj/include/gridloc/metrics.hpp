#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace gridloc {

enum class Method { Dqn, Supervised };

const char* method_tag(Method m);

/// One episode (DQN) or epoch (supervised) of a training run.
struct MetricsRow {
  int step = 0;
  std::optional<double> epsilon;
  std::optional<double> mean_reward;
  std::optional<double> train_loss;
  double test_accuracy = 0.0;

  bool operator==(const MetricsRow&) const = default;
};

struct RunMetrics {
  Method method = Method::Dqn;
  std::vector<MetricsRow> rows;

  /// Throws UsageError unless steps are strictly increasing.
  void append(const MetricsRow& row);
  std::vector<double> accuracies() const;
  std::vector<double> steps() const;
  bool operator==(const RunMetrics&) const = default;
};

using MetricsSink = std::function<void(const MetricsRow&)>;

inline constexpr const char* kMetricsHeader = "step,epsilon,mean_reward,train_loss,test_accuracy";

/// CSV with kMetricsHeader; empty fields for values that do not apply. Numbers use the
/// shortest representation that parses back to the same double.
std::string metrics_to_csv(const RunMetrics& metrics);
RunMetrics metrics_from_csv(const std::string& text, Method method);

void write_metrics_csv(const RunMetrics& metrics, const std::filesystem::path& path);
RunMetrics read_metrics_csv(const std::filesystem::path& path, Method method);

/// Shared text-file helpers; failures raise ConfigError (write) or DataError (read).
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace gridloc
