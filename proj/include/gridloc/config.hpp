#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "gridloc/agent_dqn.hpp"

namespace gridloc {

enum class MethodSelection { Dqn, Supervised, Both };

struct RunConfig {
  Hyperparams dqn;  // dqn.seed is the run seed for both methods
  int baseline_epochs = 90;
  int baseline_batch = 16;
  double baseline_lr = 1e-4;
  std::filesystem::path data = "data";  // holds train/ and test/
  std::filesystem::path out = "out";
  int render_scale = 1;
  int overlap_threshold = 1;
  MethodSelection method = MethodSelection::Both;
  int window = 20;
  bool parallel = false;  // train the two methods on separate threads

  bool runs_dqn() const { return method != MethodSelection::Supervised; }
  bool runs_supervised() const { return method != MethodSelection::Dqn; }
  /// Cross-field checks; per-key ranges are checked while parsing.
  void validate() const;
};

/// Sets one key from its textual value. ConfigError names the key for unknown keys,
/// unparsable values and out-of-range values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// Applies `key = value` lines on top of `base`. Blank lines and lines starting with
/// '#' are skipped. Errors name the source and line number.
RunConfig parse_config(std::string_view text, RunConfig base = {}, std::string_view source = "config");
RunConfig parse_config_file(const std::filesystem::path& path, RunConfig base = {});

/// Every key with its resolved value, in a fixed order; parses back to the same config.
std::string config_text(const RunConfig& cfg);

const char* method_selection_name(MethodSelection m);

}  // namespace gridloc
