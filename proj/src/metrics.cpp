#include "gridloc/metrics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "gridloc/error.hpp"

namespace gridloc {
namespace {

std::string field(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

std::optional<double> parse_field(const std::string& s, int line) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(fmt::format("metrics csv line {}: cannot parse '{}'", line, s));
  return v;
}

}  // namespace

const char* method_tag(Method m) { return m == Method::Dqn ? "dqn" : "supervised"; }

void RunMetrics::append(const MetricsRow& row) {
  if (!rows.empty() && row.step <= rows.back().step)
    throw UsageError(fmt::format("metrics: step {} after {}", row.step, rows.back().step));
  rows.push_back(row);
}

std::vector<double> RunMetrics::accuracies() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.test_accuracy);
  return out;
}

std::vector<double> RunMetrics::steps() const {
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r.step);
  return out;
}

std::string metrics_to_csv(const RunMetrics& metrics) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : metrics.rows)
    out += fmt::format("{},{},{},{},{}\n", r.step, field(r.epsilon), field(r.mean_reward), field(r.train_loss),
                       r.test_accuracy);
  return out;
}

RunMetrics metrics_from_csv(const std::string& text, Method method) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw DataError("metrics csv: missing or wrong header");
  RunMetrics m{method, {}};
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 5) throw DataError(fmt::format("metrics csv line {}: expected 5 fields", lineno));
    MetricsRow row;
    const auto step = parse_field(cells[0], lineno);
    const auto acc = parse_field(cells[4], lineno);
    if (!step || !acc) throw DataError(fmt::format("metrics csv line {}: step and test_accuracy are required", lineno));
    row.step = static_cast<int>(*step);
    row.epsilon = parse_field(cells[1], lineno);
    row.mean_reward = parse_field(cells[2], lineno);
    row.train_loss = parse_field(cells[3], lineno);
    row.test_accuracy = *acc;
    try {
      m.append(row);
    } catch (const UsageError& e) {
      throw DataError(fmt::format("metrics csv line {}: {}", lineno, e.what()));
    }
  }
  return m;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw ConfigError(fmt::format("write failed for {}", path.string()));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_metrics_csv(const RunMetrics& metrics, const std::filesystem::path& path) {
  write_text_file(path, metrics_to_csv(metrics));
}

RunMetrics read_metrics_csv(const std::filesystem::path& path, Method method) {
  return metrics_from_csv(read_text_file(path), method);
}

}  // namespace gridloc
