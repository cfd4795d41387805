#pragma once

#include <string_view>

#include <fmt/core.h>

namespace gridloc {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Level from GRIDLOC_LOG (error|info|debug), read once. Defaults to info.
LogLevel log_level();
void set_log_level(LogLevel level);
void log_line(LogLevel level, std::string_view msg);

template <typename... Args>
void log_info(fmt::format_string<Args...> f, Args&&... args) {
  if (log_level() >= LogLevel::Info) log_line(LogLevel::Info, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void log_debug(fmt::format_string<Args...> f, Args&&... args) {
  if (log_level() >= LogLevel::Debug) log_line(LogLevel::Debug, fmt::format(f, std::forward<Args>(args)...));
}

template <typename... Args>
void log_error(fmt::format_string<Args...> f, Args&&... args) {
  log_line(LogLevel::Error, fmt::format(f, std::forward<Args>(args)...));
}

}  // namespace gridloc
