#include "gridloc/grid_env.hpp"

#include <algorithm>
#include <cmath>
#include <cassert>

#include <fmt/core.h>

#include "gridloc/error.hpp"

namespace gridloc {

void GridSpec::validate() const {
  if (block_size <= 0 || image_height <= 0 || image_width <= 0)
    throw ConfigError(fmt::format("grid: non-positive dimension ({}x{}, block {})", image_height, image_width, block_size));
  if (image_height % block_size != 0 || image_width % block_size != 0)
    throw ConfigError(fmt::format("grid: image {}x{} is not a multiple of block {}", image_height, image_width, block_size));
}

const char* action_name(Action a) {
  switch (a) {
    case Action::Stay: return "stay";
    case Action::Down: return "down";
    case Action::Right: return "right";
  }
  return "?";
}

bool overlaps(const Mask& mask, const GridSpec& spec, AgentPos pos, int threshold) {
  const int b = spec.block_size;
  const auto block = mask.block(pos.row * b, pos.col * b, b, b);
  return (block != 0).count() >= threshold;
}

OverlapTable overlap_table(const Mask& mask, const GridSpec& spec, int threshold) {
  OverlapTable t(spec.rows(), spec.cols());
  for (int r = 0; r < spec.rows(); ++r)
    for (int c = 0; c < spec.cols(); ++c) t(r, c) = overlaps(mask, spec, {r, c}, threshold);
  return t;
}

AgentPos block_at(const GridSpec& spec, double row_px, double col_px) {
  const auto cell = [&](double px, int extent) {
    const double clamped = std::clamp(std::floor(px), 0.0, static_cast<double>(extent - 1));
    return static_cast<int>(clamped) / spec.block_size;
  };
  return {cell(row_px, spec.image_height), cell(col_px, spec.image_width)};
}

AgentPos next_position(const GridSpec& spec, AgentPos pos, Action a) {
  switch (a) {
    case Action::Stay: break;
    case Action::Down: pos.row = std::min(pos.row + 1, spec.rows() - 1); break;
    case Action::Right: pos.col = std::min(pos.col + 1, spec.cols() - 1); break;
  }
  return pos;
}

Image downscale(const Image& image, int scale) {
  if (scale == 1) return image;
  const Eigen::Index h = image.rows() / scale, w = image.cols() / scale;
  Image out(h, w);
  const float inv = 1.0f / static_cast<float>(scale * scale);
  for (Eigen::Index y = 0; y < h; ++y)
    for (Eigen::Index x = 0; x < w; ++x) out(y, x) = image.block(y * scale, x * scale, scale, scale).sum() * inv;
  return out;
}

void write_state(const Image& pooled, const GridSpec& spec, int scale, AgentPos pos, std::span<float> out) {
  const int h = static_cast<int>(pooled.rows()), w = static_cast<int>(pooled.cols());
  assert(out.size() == static_cast<std::size_t>(h) * w * 2);
  const int fb = spec.block_size / scale;
  const int y0 = pos.row * fb, x0 = pos.col * fb;
  std::size_t k = 0;
  for (int y = 0; y < h; ++y) {
    const bool row_in = y >= y0 && y < y0 + fb;
    for (int x = 0; x < w; ++x) {
      out[k++] = pooled(y, x);
      out[k++] = (row_in && x >= x0 && x < x0 + fb) ? 1.0f : 0.0f;
    }
  }
}

GridEnv::GridEnv(GridSpec spec, Image image, Mask mask, EnvOptions options)
    : spec_(spec), options_(options), image_(std::move(image)), mask_(std::move(mask)) {
  spec_.validate();
  if (image_.rows() != spec_.image_height || image_.cols() != spec_.image_width || mask_.rows() != spec_.image_height ||
      mask_.cols() != spec_.image_width)
    throw ConfigError(fmt::format("env: image {}x{} / mask {}x{} do not match grid {}x{}", image_.rows(), image_.cols(),
                                  mask_.rows(), mask_.cols(), spec_.image_height, spec_.image_width));
  if (options_.render_scale < 1 || spec_.block_size % options_.render_scale != 0)
    throw ConfigError(fmt::format("env: render scale {} must divide block size {}", options_.render_scale, spec_.block_size));
  if (options_.overlap_threshold < 1) throw ConfigError("env: overlap threshold must be >= 1");
  pooled_ = downscale(image_, options_.render_scale);
  overlap_ = overlap_table(mask_, spec_, options_.overlap_threshold);
}

StateTensor GridEnv::reset() {
  pos_ = {0, 0};
  step_count_ = 0;
  return render_state();
}

double GridEnv::advance(Action a) {
  const double r = reward(pos_, a);
  pos_ = successor(pos_, a);
  ++step_count_;
  return r;
}

StepResult GridEnv::step(Action a) {
  const double r = advance(a);
  return {r, render_state()};
}

void GridEnv::set_pos(AgentPos pos) {
  if (pos.row < 0 || pos.col < 0 || pos.row >= spec_.rows() || pos.col >= spec_.cols())
    throw UsageError(fmt::format("env: position ({},{}) outside grid", pos.row, pos.col));
  pos_ = pos;
}

StateTensor GridEnv::render_state() const {
  StateTensor s;
  s.height = render_height();
  s.width = render_width();
  s.data.resize(state_size());
  write_state(pooled_, spec_, options_.render_scale, pos_, {s.data.data(), static_cast<std::size_t>(s.data.size())});
  return s;
}

Rollout greedy_rollout(GridEnv& env, const Policy& policy, int steps) {
  if (steps < 1) throw UsageError("rollout: steps must be >= 1");
  Rollout out;
  env.reset();
  out.trajectory.reserve(steps + 1);
  out.trajectory.push_back(env.pos());
  for (int t = 0; t < steps; ++t) {
    const Action a = policy(env);
    out.total_reward += env.advance(a);
    out.actions.push_back(a);
    out.trajectory.push_back(env.pos());
  }
  out.success = env.overlaps_at(env.pos());
  return out;
}

}  // namespace gridloc
