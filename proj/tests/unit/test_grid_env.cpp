#include <doctest.h>

#include <set>

#include "gridloc/error.hpp"
#include "gridloc/grid_env.hpp"
#include "gridloc/oracle.hpp"

using namespace gridloc;

namespace {

Image flat_image(int h, int w, float v = 0.5f) { return Image::Constant(h, w, v); }
Mask empty_mask(int h, int w) { return Mask::Zero(h, w); }

/// Mask lesion filling block (r, c) exactly.
Mask block_mask(const GridSpec& spec, int r, int c) {
  Mask m = empty_mask(spec.image_height, spec.image_width);
  m.block(r * spec.block_size, c * spec.block_size, spec.block_size, spec.block_size) = 1;
  return m;
}

GridEnv make_env(const Mask& mask, EnvOptions opt = {}) {
  GridSpec spec;
  return GridEnv(spec, flat_image(spec.image_height, spec.image_width), mask, opt);
}

}  // namespace

TEST_CASE("reward table") {
  CHECK(reward_of(false, false) == -2.0);
  CHECK(reward_of(false, true) == 1.0);
  CHECK(reward_of(true, false) == -0.5);
  CHECK(reward_of(true, true) == 1.0);
}

TEST_CASE("grid spec geometry and validation") {
  GridSpec s;
  CHECK(s.rows() == 4);
  CHECK(s.cols() == 4);
  CHECK_NOTHROW(s.validate());
  CHECK_THROWS_AS((GridSpec{250, 240, 60}.validate()), ConfigError);
  CHECK_THROWS_AS((GridSpec{240, 240, 0}.validate()), ConfigError);
}

TEST_CASE("overlap predicate") {
  GridSpec spec;
  const Mask none = empty_mask(240, 240);
  const Mask all = Mask::Ones(240, 240);
  Mask one = empty_mask(240, 240);
  one(130, 130) = 1;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      CHECK_FALSE(overlaps(none, spec, {r, c}));
      CHECK(overlaps(all, spec, {r, c}));
      CHECK(overlaps(one, spec, {r, c}) == (r == 2 && c == 2));
    }

  SUBCASE("threshold counts pixels") {
    Mask two = empty_mask(240, 240);
    two(0, 0) = two(1, 1) = 1;
    CHECK(overlaps(two, spec, {0, 0}, 2));
    CHECK_FALSE(overlaps(two, spec, {0, 0}, 3));
  }
}

TEST_CASE("clipped transitions") {
  GridSpec spec;
  CHECK(next_position(spec, {1, 1}, Action::Stay) == AgentPos{1, 1});
  CHECK(next_position(spec, {1, 1}, Action::Down) == AgentPos{2, 1});
  CHECK(next_position(spec, {1, 1}, Action::Right) == AgentPos{1, 2});
  CHECK(next_position(spec, {3, 2}, Action::Down) == AgentPos{3, 2});
  CHECK(next_position(spec, {2, 3}, Action::Right) == AgentPos{2, 3});
}

TEST_CASE("clipped move still counts as a move") {
  GridEnv env = make_env(block_mask(GridSpec{}, 3, 3));
  env.set_pos({3, 0});
  CHECK(env.step(Action::Down).reward == -0.5);  // clipped, outside
  env.set_pos({3, 3});
  CHECK(env.step(Action::Right).reward == 1.0);  // clipped, inside
  CHECK(env.pos() == AgentPos{3, 3});
}

TEST_CASE("step rewards follow the resulting cell") {
  GridEnv env = make_env(block_mask(GridSpec{}, 0, 1));
  env.reset();
  CHECK(env.step(Action::Stay).reward == -2.0);
  CHECK(env.step(Action::Right).reward == 1.0);
  CHECK(env.step(Action::Stay).reward == 1.0);
  CHECK(env.step(Action::Down).reward == -0.5);
  CHECK(env.step_count() == 4);
}

TEST_CASE("reset renders the agent in the top-left block") {
  GridEnv env = make_env(block_mask(GridSpec{}, 2, 2));
  const StateTensor s = env.reset();
  CHECK(env.pos() == AgentPos{0, 0});
  CHECK(env.step_count() == 0);
  CHECK(s.height == 240);
  for (int y = 0; y < 240; y += 7)
    for (int x = 0; x < 240; x += 7) CHECK(s.at(1, y, x) == ((y < 60 && x < 60) ? 1.0f : 0.0f));
  CHECK(s.at(1, 59, 59) == 1.0f);
  CHECK(s.at(1, 60, 59) == 0.0f);
  CHECK(env.reset() == s);
}

TEST_CASE("small image: agent covers the top-left quadrant") {
  GridSpec spec{120, 120, 60};
  GridEnv env(spec, flat_image(120, 120), empty_mask(120, 120));
  const StateTensor s = env.reset();
  double sum = 0;
  for (int y = 0; y < 120; ++y)
    for (int x = 0; x < 120; ++x) {
      sum += s.at(1, y, x);
      if (y < 60 && x < 60) CHECK(s.at(1, y, x) == 1.0f);
    }
  CHECK(sum == 3600.0);
}

TEST_CASE("render scale") {
  GridSpec spec;
  Image img(240, 240);
  for (int y = 0; y < 240; ++y)
    for (int x = 0; x < 240; ++x) img(y, x) = static_cast<float>((y * 240 + x) % 97) / 96.0f;
  GridEnv env(spec, img, block_mask(spec, 1, 1), EnvOptions{1, 4});
  const StateTensor s0 = env.reset();
  CHECK(s0.height == 60);
  CHECK(s0.width == 60);
  CHECK(env.state_size() == 60 * 60 * 2);

  double agent = 0;
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 60; ++x) agent += s0.at(1, y, x);
  CHECK(agent == 15.0 * 15.0);

  SUBCASE("channel 0 is the average pool and independent of position") {
    double ref = 0;
    for (int dy = 0; dy < 4; ++dy)
      for (int dx = 0; dx < 4; ++dx) ref += img(8 + dy, 12 + dx);
    CHECK(s0.at(0, 2, 3) == doctest::Approx(ref / 16).epsilon(1e-6));
    env.step(Action::Down);
    env.step(Action::Right);
    const StateTensor s1 = env.render_state();
    for (int y = 0; y < 60; ++y)
      for (int x = 0; x < 60; ++x) CHECK(s1.at(0, y, x) == s0.at(0, y, x));
    CHECK(s1.at(1, 15, 15) == 1.0f);
    CHECK(s1.at(1, 14, 15) == 0.0f);
  }
  CHECK_THROWS_AS(GridEnv(spec, img, block_mask(spec, 1, 1), EnvOptions{1, 7}), ConfigError);
}

TEST_CASE("constructor rejects mismatched shapes") {
  GridSpec spec;
  CHECK_THROWS_AS(GridEnv(spec, flat_image(200, 240), empty_mask(240, 240)), ConfigError);
  CHECK_THROWS_AS(GridEnv(spec, flat_image(240, 240), empty_mask(240, 200)), ConfigError);
}

TEST_CASE("set_pos rejects positions off the grid") {
  GridEnv env = make_env(empty_mask(240, 240));
  CHECK_THROWS_AS(env.set_pos({4, 0}), UsageError);
  CHECK_THROWS_AS(env.set_pos({0, -1}), UsageError);
}

TEST_CASE("determinism and reward range over all pairs") {
  Mask m = empty_mask(240, 240);
  m.block(100, 70, 30, 90) = 1;
  GridEnv env = make_env(m);
  const std::set<double> allowed{-2.0, -0.5, 1.0};
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      for (Action a : kActions) {
        env.set_pos({r, c});
        const StepResult s1 = env.step(a);
        const AgentPos p1 = env.pos();
        env.set_pos({r, c});
        const StepResult s2 = env.step(a);
        CHECK(s1.reward == s2.reward);
        CHECK(s1.next_state == s2.next_state);
        CHECK(env.pos() == p1);
        CHECK(allowed.count(s1.reward) == 1);
        CHECK((s1.reward == 1.0) == env.overlaps_at(p1));
        CHECK(p1.row >= r);
        CHECK(p1.col >= c);
      }
}

TEST_CASE("every cell is reachable with row+col moves") {
  GridSpec spec;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      AgentPos p{0, 0};
      for (int i = 0; i < r; ++i) p = next_position(spec, p, Action::Down);
      for (int i = 0; i < c; ++i) p = next_position(spec, p, Action::Right);
      CHECK(p == AgentPos{r, c});
    }
}

TEST_CASE("greedy rollout") {
  GridEnv env = make_env(block_mask(GridSpec{}, 2, 3));
  SUBCASE("always stay fails and records steps+1 positions") {
    const Rollout r = greedy_rollout(env, [](const GridEnv&) { return Action::Stay; }, 20);
    CHECK(r.trajectory.size() == 21);
    CHECK(r.actions.size() == 20);
    CHECK_FALSE(r.success);
    CHECK(r.total_reward == -40.0);
  }
  SUBCASE("optimal policy succeeds") {
    const QTable q = value_iteration(env, 0.99);
    const Rollout r = greedy_rollout(env, table_policy(q), 20);
    CHECK(r.success);
    CHECK(r.trajectory.back() == AgentPos{2, 3});
  }
  CHECK_THROWS_AS(greedy_rollout(env, [](const GridEnv&) { return Action::Stay; }, 0), UsageError);
}

TEST_CASE("block_at maps and clamps pixels") {
  GridSpec spec;
  CHECK(block_at(spec, 0, 0) == AgentPos{0, 0});
  CHECK(block_at(spec, 59.9, 60) == AgentPos{0, 1});
  CHECK(block_at(spec, 130, 130) == AgentPos{2, 2});
  CHECK(block_at(spec, 239, 239) == AgentPos{3, 3});
  CHECK(block_at(spec, 1e9, -5) == AgentPos{3, 0});
}

TEST_CASE("action codes") {
  CHECK(static_cast<int>(Action::Stay) == 1);
  CHECK(static_cast<int>(Action::Down) == 2);
  CHECK(static_cast<int>(Action::Right) == 3);
  for (int i = 0; i < kNumActions; ++i) CHECK(action_index(action_from_index(i)) == i);
}
