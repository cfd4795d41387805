#include "gridloc/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <string>

namespace gridloc {
namespace {

std::optional<LogLevel>& level_override() {
  static std::optional<LogLevel> level;
  return level;
}

LogLevel level_from_env() {
  const char* env = std::getenv("GRIDLOC_LOG");
  if (env == nullptr) return LogLevel::Info;
  const std::string v(env);
  if (v == "error") return LogLevel::Error;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

}  // namespace

LogLevel log_level() {
  static const LogLevel from_env = level_from_env();
  return level_override().value_or(from_env);
}

void set_log_level(LogLevel level) { level_override() = level; }

void log_line(LogLevel level, std::string_view msg) {
  static constexpr const char* kTags[] = {"error", "info", "debug"};
  std::fprintf(stderr, "[gridloc %s] %.*s\n", kTags[static_cast<int>(level)],
               static_cast<int>(msg.size()), msg.data());
}

}  // namespace gridloc
