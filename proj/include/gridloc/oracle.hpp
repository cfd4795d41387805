#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridloc/agent_dqn.hpp"
#include "gridloc/grid_env.hpp"

namespace gridloc {

/// Exact action values for one image's gridworld, indexed by (row, col, action).
struct QTable {
  int rows = 0;
  int cols = 0;
  double gamma = 0.0;
  double residual = 0.0;  // max change of the last sweep (value iteration only)
  std::vector<double> values;

  static QTable zeros(int rows, int cols, double gamma);

  double& q(AgentPos p, Action a) { return values[index(p, a)]; }
  double q(AgentPos p, Action a) const { return values[index(p, a)]; }
  QValues at(AgentPos p) const { return {q(p, Action::Stay), q(p, Action::Down), q(p, Action::Right)}; }
  double value(AgentPos p) const { return at(p).maxCoeff(); }
  Action greedy(AgentPos p) const { return greedy_action(at(p)); }
  double max_abs_diff(const QTable& other) const;

 private:
  std::size_t index(AgentPos p, Action a) const {
    return (static_cast<std::size_t>(p.row) * cols + p.col) * kNumActions + action_index(a);
  }
};

/// Synchronous sweeps of Q(s,a) = r(s,a) + gamma * max Q(s',.) until the largest
/// change drops below `tol`. Sweep residuals go to `residuals` when given.
QTable value_iteration(const GridEnv& env, double gamma, double tol = 1e-9, std::vector<double>* residuals = nullptr);

/// Optimal finite-horizon values: element h holds Q with exactly h steps to go
/// (element 0 is all zeros), for h = 0..horizon.
std::vector<QTable> backward_induction(const GridEnv& env, double gamma, int horizon);

struct TabularConfig {
  double gamma = 0.99;
  double epsilon = 0.3;
  double alpha = 0.1;
  std::int64_t iterations = 50000;  // number of single-entry updates
  int steps_per_episode = 20;
  /// Sweep every (state, action) pair in order instead of following episodes.
  bool exhaustive = false;
};

/// Tabular TD(0) Q-learning on one environment, starting from an all-zero table.
/// Episodic mode follows epsilon-greedy behaviour from the top-left block with the
/// same action selection as the deep agent.
QTable tabular_q_learning(const GridEnv& env, const TabularConfig& cfg, Rng& rng);

/// Policy acting greedily on a table (lowest-code tie-break).
Policy table_policy(const QTable& table);

/// Positions visited by the greedy policy of `table` over `steps` steps from (0,0),
/// without repeats, in visiting order.
std::vector<AgentPos> greedy_path(const QTable& table, const GridEnv& env, int steps);

/// CSV "row,col,q_stay,q_down,q_right", one line per cell.
std::string qtable_csv(const QTable& table);

}  // namespace gridloc
