#pragma once

#include <stdexcept>
#include <string>

namespace gridloc {

enum class ErrorKind { Config, Data, Numerical, Usage };

/// Process exit code for the CLI: 2 config, 3 data, 4 numerical.
constexpr int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Data: return 3;
    case ErrorKind::Numerical: return 4;
    case ErrorKind::Usage: return 1;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

/// API misuse (stale cache, empty batch, ...). Programming errors, not user input.
struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

/// Rethrows `e` as the same kind with `prefix` prepended to its message.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& prefix) {
  const std::string msg = prefix + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::Config: throw ConfigError(msg);
    case ErrorKind::Data: throw DataError(msg);
    case ErrorKind::Numerical: throw NumericalError(msg);
    case ErrorKind::Usage: break;
  }
  throw UsageError(msg);
}

}  // namespace gridloc
