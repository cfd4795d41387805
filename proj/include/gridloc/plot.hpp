#pragma once

#include <filesystem>
#include <string>

#include "gridloc/metrics.hpp"

namespace gridloc {

/// Accuracy-versus-training-time chart: DQN rows as circles with a red fit line,
/// supervised rows as diamonds with a green fit line. Either series may be empty.
std::string plot_svg(const RunMetrics& dqn, const RunMetrics& baseline);
void plot_svg(const RunMetrics& dqn, const RunMetrics& baseline, const std::filesystem::path& out);

}  // namespace gridloc
