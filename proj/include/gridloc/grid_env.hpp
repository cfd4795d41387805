#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace gridloc {

/// Row-major intensity image, values in [0,1].
using Image = Eigen::Array<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
/// Row-major binary mask (0 background, nonzero lesion).
using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using OverlapTable = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GridSpec {
  int image_height = 240;
  int image_width = 240;
  int block_size = 60;

  int rows() const { return image_height / block_size; }
  int cols() const { return image_width / block_size; }
  /// Throws ConfigError unless both image sides are positive multiples of block_size.
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

struct AgentPos {
  int row = 0;
  int col = 0;

  auto operator<=>(const AgentPos&) const = default;
};

/// Integer codes follow the action ordering stay / down / right.
enum class Action : int { Stay = 1, Down = 2, Right = 3 };

inline constexpr std::array<Action, 3> kActions{Action::Stay, Action::Down, Action::Right};
inline constexpr int kNumActions = 3;

constexpr int action_index(Action a) { return static_cast<int>(a) - 1; }
constexpr Action action_from_index(int i) { return static_cast<Action>(i + 1); }
const char* action_name(Action a);

inline constexpr double kRewardStayOutside = -2.0;
inline constexpr double kRewardStayInside = 1.0;
inline constexpr double kRewardMoveOutside = -0.5;
inline constexpr double kRewardMoveInside = 1.0;

/// Reward for an action given whether it was a move (down/right, even if clipped at
/// the border) and whether the resulting block overlaps the lesion.
constexpr double reward_of(bool moved, bool overlaps_after) {
  if (!moved) return overlaps_after ? kRewardStayInside : kRewardStayOutside;
  return overlaps_after ? kRewardMoveInside : kRewardMoveOutside;
}

/// True iff block `pos` holds at least `threshold` nonzero mask pixels.
bool overlaps(const Mask& mask, const GridSpec& spec, AgentPos pos, int threshold = 1);

/// Per-block overlap flags for a whole mask.
OverlapTable overlap_table(const Mask& mask, const GridSpec& spec, int threshold = 1);

/// Block containing the pixel coordinate (row, col); coordinates are clamped to the image.
AgentPos block_at(const GridSpec& spec, double row_px, double col_px);

/// Clipped successor position; never leaves the grid.
AgentPos next_position(const GridSpec& spec, AgentPos pos, Action a);

/// k×k average-pool downscale. `scale` must divide both image sides.
Image downscale(const Image& image, int scale);

/// Two-channel state, stored interleaved (HWC): channel 0 the image, channel 1 the
/// agent footprint. Networks consume this layout directly.
struct StateTensor {
  static constexpr int kChannels = 2;
  int height = 0;
  int width = 0;
  Eigen::VectorXf data;

  float at(int channel, int y, int x) const { return data[(static_cast<Eigen::Index>(y) * width + x) * kChannels + channel]; }
  bool operator==(const StateTensor& o) const {
    return height == o.height && width == o.width && data.size() == o.data.size() && (data.array() == o.data.array()).all();
  }
};

/// Writes the HWC state for an agent at `pos` into `out` (size h*w*2) from an
/// already-downscaled image.
void write_state(const Image& pooled, const GridSpec& spec, int scale, AgentPos pos, std::span<float> out);

struct EnvOptions {
  int overlap_threshold = 1;
  int render_scale = 1;
};

struct StepResult {
  double reward = 0.0;
  StateTensor next_state;
};

class GridEnv {
 public:
  GridEnv(GridSpec spec, Image image, Mask mask, EnvOptions options = {});

  StateTensor reset();
  StepResult step(Action a);
  /// step() without rendering the successor state.
  double advance(Action a);

  StateTensor render_state() const;

  /// Model queries, independent of the current position.
  AgentPos successor(AgentPos pos, Action a) const { return next_position(spec_, pos, a); }
  double reward(AgentPos pos, Action a) const {
    const AgentPos next = successor(pos, a);
    return reward_of(a != Action::Stay, overlap_(next.row, next.col));
  }
  bool overlaps_at(AgentPos pos) const { return overlap_(pos.row, pos.col); }
  bool any_overlap() const { return overlap_.any(); }

  const GridSpec& spec() const { return spec_; }
  const EnvOptions& options() const { return options_; }
  const Image& image() const { return image_; }
  const Mask& mask() const { return mask_; }
  const Image& pooled_image() const { return pooled_; }
  const OverlapTable& overlap_cells() const { return overlap_; }
  AgentPos pos() const { return pos_; }
  void set_pos(AgentPos pos);
  int step_count() const { return step_count_; }

  int render_height() const { return spec_.image_height / options_.render_scale; }
  int render_width() const { return spec_.image_width / options_.render_scale; }
  int state_size() const { return render_height() * render_width() * StateTensor::kChannels; }

 private:
  GridSpec spec_;
  EnvOptions options_;
  Image image_;
  Mask mask_;
  Image pooled_;
  OverlapTable overlap_;
  AgentPos pos_{};
  int step_count_ = 0;
};

using Policy = std::function<Action(const GridEnv&)>;

struct Rollout {
  std::vector<AgentPos> trajectory;  // steps + 1 entries, starting at (0,0)
  std::vector<Action> actions;
  double total_reward = 0.0;
  bool success = false;  // final block overlaps the lesion
};

/// Resets `env` and follows `policy` for `steps` steps.
Rollout greedy_rollout(GridEnv& env, const Policy& policy, int steps = 20);

}  // namespace gridloc
