#include "gridloc/config.hpp"

#include <array>
#include <charconv>
#include <functional>

#include <fmt/core.h>

#include "gridloc/error.hpp"
#include "gridloc/metrics.hpp"

namespace gridloc {

namespace {

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, value));
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, value));
}

template <typename T>
T in_range(std::string_view key, T v, T lo, T hi, bool open_lo = false, bool open_hi = false) {
  const bool ok = (open_lo ? v > lo : v >= lo) && (open_hi ? v < hi : v <= hi);
  if (!ok)
    throw ConfigError(fmt::format("{}: {} is outside {}{}, {}{}", key, v, open_lo ? '(' : '[', lo, hi, open_hi ? ')' : ']'));
  return v;
}

constexpr int kIntMax = 1 << 30;

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

struct Entry {
  const char* key;
  Setter set;
};

const std::array<Entry, 21>& entries() {
  static const std::array<Entry, 21> table{{
      {"gamma", [](RunConfig& c, auto k, auto v) { c.dqn.gamma = in_range(k, parse_number<double>(k, v), 0.0, 1.0, true, true); }},
      {"eps_init", [](RunConfig& c, auto k, auto v) { c.dqn.eps_init = in_range(k, parse_number<double>(k, v), 0.0, 1.0); }},
      {"eps_decay", [](RunConfig& c, auto k, auto v) { c.dqn.eps_decay = in_range(k, parse_number<double>(k, v), 0.0, 1.0); }},
      {"eps_min", [](RunConfig& c, auto k, auto v) { c.dqn.eps_min = in_range(k, parse_number<double>(k, v), 0.0, 1.0); }},
      {"eps_decay_per_step", [](RunConfig& c, auto k, auto v) { c.dqn.eps_decay_per_step = parse_bool(k, v); }},
      {"lr", [](RunConfig& c, auto k, auto v) { c.dqn.lr = in_range(k, parse_number<double>(k, v), 0.0, 1.0, true); }},
      {"batch", [](RunConfig& c, auto k, auto v) { c.dqn.batch = in_range(k, parse_number<int>(k, v), 1, kIntMax); }},
      {"steps_per_episode",
       [](RunConfig& c, auto k, auto v) { c.dqn.steps_per_episode = in_range(k, parse_number<int>(k, v), 1, kIntMax); }},
      {"episodes", [](RunConfig& c, auto k, auto v) { c.dqn.episodes = in_range(k, parse_number<int>(k, v), 1, kIntMax); }},
      {"memory", [](RunConfig& c, auto k, auto v) { c.dqn.memory = in_range(k, parse_number<int>(k, v), 1, kIntMax); }},
      {"seed", [](RunConfig& c, auto k, auto v) { c.dqn.seed = parse_number<std::uint64_t>(k, v); }},
      {"baseline_epochs", [](RunConfig& c, auto k, auto v) { c.baseline_epochs = in_range(k, parse_number<int>(k, v), 1, kIntMax); }},
      {"baseline_batch", [](RunConfig& c, auto k, auto v) { c.baseline_batch = in_range(k, parse_number<int>(k, v), 1, kIntMax); }},
      {"baseline_lr", [](RunConfig& c, auto k, auto v) { c.baseline_lr = in_range(k, parse_number<double>(k, v), 0.0, 1.0, true); }},
      {"data", [](RunConfig& c, auto, auto v) { c.data = std::string(v); }},
      {"out", [](RunConfig& c, auto, auto v) { c.out = std::string(v); }},
      {"render_scale", [](RunConfig& c, auto k, auto v) { c.render_scale = in_range(k, parse_number<int>(k, v), 1, kIntMax); }},
      {"overlap_threshold",
       [](RunConfig& c, auto k, auto v) { c.overlap_threshold = in_range(k, parse_number<int>(k, v), 1, kIntMax); }},
      {"method",
       [](RunConfig& c, auto k, auto v) {
         if (v == "dqn") c.method = MethodSelection::Dqn;
         else if (v == "supervised") c.method = MethodSelection::Supervised;
         else if (v == "both") c.method = MethodSelection::Both;
         else throw ConfigError(fmt::format("{}: expected dqn, supervised or both, got '{}'", k, v));
       }},
      {"window", [](RunConfig& c, auto k, auto v) { c.window = in_range(k, parse_number<int>(k, v), 1, kIntMax); }},
      {"parallel", [](RunConfig& c, auto k, auto v) { c.parallel = parse_bool(k, v); }},
  }};
  return table;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

const char* method_selection_name(MethodSelection m) {
  switch (m) {
    case MethodSelection::Dqn: return "dqn";
    case MethodSelection::Supervised: return "supervised";
    case MethodSelection::Both: return "both";
  }
  return "?";
}

void RunConfig::validate() const {
  dqn.validate();
  if (dqn.eps_decay_per_step && dqn.eps_decay > 1.0) throw ConfigError("eps_decay: must be <= 1");
  if (data.empty()) throw ConfigError("data: path is empty");
  if (out.empty()) throw ConfigError("out: path is empty");
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  for (const Entry& e : entries())
    if (key == e.key) {
      e.set(cfg, key, value);
      return;
    }
  throw ConfigError(fmt::format("unknown key '{}'", key));
}

RunConfig parse_config(std::string_view text, RunConfig base, std::string_view source) {
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("{}:{}: expected 'key = value', got '{}'", source, line_no, line));
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      set_config_value(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", source, line_no, e.what()));
    }
  }
  return base;
}

RunConfig parse_config_file(const std::filesystem::path& path, RunConfig base) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, std::move(base), path.string());
}

std::string config_text(const RunConfig& c) {
  std::string out;
  const auto put = [&out](const char* key, const auto& value) { out += fmt::format("{} = {}\n", key, value); };
  put("gamma", c.dqn.gamma);
  put("eps_init", c.dqn.eps_init);
  put("eps_decay", c.dqn.eps_decay);
  put("eps_min", c.dqn.eps_min);
  put("eps_decay_per_step", c.dqn.eps_decay_per_step);
  put("lr", c.dqn.lr);
  put("batch", c.dqn.batch);
  put("steps_per_episode", c.dqn.steps_per_episode);
  put("episodes", c.dqn.episodes);
  put("memory", c.dqn.memory);
  put("seed", c.dqn.seed);
  put("baseline_epochs", c.baseline_epochs);
  put("baseline_batch", c.baseline_batch);
  put("baseline_lr", c.baseline_lr);
  put("data", c.data.string());
  put("out", c.out.string());
  put("render_scale", c.render_scale);
  put("overlap_threshold", c.overlap_threshold);
  put("method", method_selection_name(c.method));
  put("window", c.window);
  put("parallel", c.parallel);
  return out;
}

}  // namespace gridloc
