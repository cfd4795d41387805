#include "gridloc/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "gridloc/error.hpp"

namespace gridloc {

QTable QTable::zeros(int rows, int cols, double gamma) {
  QTable t;
  t.rows = rows;
  t.cols = cols;
  t.gamma = gamma;
  t.values.assign(static_cast<std::size_t>(rows) * cols * kNumActions, 0.0);
  return t;
}

double QTable::max_abs_diff(const QTable& other) const {
  if (values.size() != other.values.size()) throw UsageError("QTable::max_abs_diff: shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m = std::max(m, std::abs(values[i] - other.values[i]));
  return m;
}

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError(fmt::format("oracle: gamma must be in (0,1), got {}", gamma));
}

/// One synchronous Bellman optimality backup of `from` into `to`.
void backup(const GridEnv& env, const QTable& from, QTable& to) {
  for (int r = 0; r < from.rows; ++r)
    for (int c = 0; c < from.cols; ++c)
      for (Action a : kActions) {
        const AgentPos s{r, c};
        to.q(s, a) = env.reward(s, a) + from.gamma * from.value(env.successor(s, a));
      }
}

}  // namespace

QTable value_iteration(const GridEnv& env, double gamma, double tol, std::vector<double>* residuals) {
  check_gamma(gamma);
  if (!(tol > 0.0)) throw ConfigError("value_iteration: tol must be > 0");
  QTable q = QTable::zeros(env.spec().rows(), env.spec().cols(), gamma);
  QTable next = q;
  for (;;) {
    backup(env, q, next);
    const double change = next.max_abs_diff(q);
    std::swap(q.values, next.values);
    q.residual = change;
    if (residuals != nullptr) residuals->push_back(change);
    if (change < tol) return q;
  }
}

std::vector<QTable> backward_induction(const GridEnv& env, double gamma, int horizon) {
  check_gamma(gamma);
  if (horizon < 1) throw ConfigError("backward_induction: horizon must be >= 1");
  std::vector<QTable> out;
  out.reserve(static_cast<std::size_t>(horizon) + 1);
  out.push_back(QTable::zeros(env.spec().rows(), env.spec().cols(), gamma));
  for (int h = 1; h <= horizon; ++h) {
    QTable next = out.back();
    backup(env, out.back(), next);
    out.push_back(std::move(next));
  }
  return out;
}

QTable tabular_q_learning(const GridEnv& env_in, const TabularConfig& cfg, Rng& rng) {
  check_gamma(cfg.gamma);
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ConfigError(fmt::format("tabular: alpha must be in (0,1], got {}", cfg.alpha));
  if (cfg.iterations < 0) throw ConfigError("tabular: iterations must be >= 0");
  GridEnv env = env_in;
  QTable q = QTable::zeros(env.spec().rows(), env.spec().cols(), cfg.gamma);
  const auto update = [&](AgentPos s, Action a) {
    const AgentPos next = env.successor(s, a);
    const double target = td_target(env.reward(s, a), q.at(next), cfg.gamma);
    q.q(s, a) += cfg.alpha * (target - q.q(s, a));
  };

  if (cfg.exhaustive) {
    const std::int64_t pairs = static_cast<std::int64_t>(q.rows) * q.cols * kNumActions;
    for (std::int64_t i = 0; i < cfg.iterations; ++i) {
      const std::int64_t k = i % pairs;
      const auto cell = static_cast<int>(k / kNumActions);
      update({cell / q.cols, cell % q.cols}, action_from_index(static_cast<int>(k % kNumActions)));
    }
    return q;
  }

  std::int64_t done = 0;
  while (done < cfg.iterations) {
    env.reset();
    for (int t = 0; t < cfg.steps_per_episode && done < cfg.iterations; ++t, ++done) {
      const AgentPos s = env.pos();
      const Action a = select_action(q.at(s), cfg.epsilon, rng);
      update(s, a);
      env.advance(a);
    }
  }
  return q;
}

Policy table_policy(const QTable& table) {
  return [table](const GridEnv& env) { return table.greedy(env.pos()); };
}

std::vector<AgentPos> greedy_path(const QTable& table, const GridEnv& env, int steps) {
  std::vector<AgentPos> path{{0, 0}};
  AgentPos p{0, 0};
  for (int t = 0; t < steps; ++t) {
    p = env.successor(p, table.greedy(p));
    if (std::find(path.begin(), path.end(), p) == path.end()) path.push_back(p);
  }
  return path;
}

std::string qtable_csv(const QTable& table) {
  std::string out = "row,col,q_stay,q_down,q_right\n";
  for (int r = 0; r < table.rows; ++r)
    for (int c = 0; c < table.cols; ++c) {
      const QValues q = table.at({r, c});
      out += fmt::format("{},{},{:.9f},{:.9f},{:.9f}\n", r, c, q[0], q[1], q[2]);
    }
  return out;
}

}  // namespace gridloc
