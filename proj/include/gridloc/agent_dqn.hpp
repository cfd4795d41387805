#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gridloc/grid_env.hpp"
#include "gridloc/metrics.hpp"
#include "gridloc/neuro/adam.hpp"
#include "gridloc/neuro/loss.hpp"
#include "gridloc/neuro/net.hpp"

namespace gridloc {

using Rng = std::mt19937_64;
using QValues = Eigen::Vector3d;

struct Hyperparams {
  double gamma = 0.99;
  double eps_init = 0.7;
  double eps_decay = 1e-4;  // per episode, or per environment step when eps_decay_per_step
  double eps_min = 1e-4;
  bool eps_decay_per_step = false;
  double lr = 1e-4;
  int batch = 128;
  int steps_per_episode = 20;
  int episodes = 90;
  int memory = 15000;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// max(eps_min, eps_init - t * eps_decay), t counting episodes (or steps).
double epsilon_at(std::int64_t t, const Hyperparams& hp);

/// Index of the largest Q value; ties go to the lowest action code.
Action greedy_action(const QValues& q);

/// Explores (uniform action) with probability eps, otherwise greedy. Always consumes
/// one uniform draw, plus one more when exploring.
Action select_action(const QValues& q, double eps, Rng& rng);

/// One-step bootstrapped target r + gamma * max(next_q). No terminal states exist.
double td_target(double reward, const QValues& next_q, double gamma);

struct Transition {
  int image_id = 0;
  AgentPos pos;
  Action action = Action::Stay;
  double reward = 0.0;
  AgentPos next_pos;

  bool operator==(const Transition&) const = default;
};

/// Fixed-capacity FIFO of transitions; sampling is uniform with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return items_.size(); }
  std::uint64_t pushed() const { return pushed_; }
  /// i-th oldest stored transition.
  const Transition& operator[](std::size_t i) const;
  std::size_t sample_index(Rng& rng) const;
  std::vector<Transition> contents() const;

 private:
  std::vector<Transition> items_;
  std::size_t head_ = 0;  // slot of the oldest item
  std::size_t size_ = 0;
  std::uint64_t pushed_ = 0;
};

/// States for a list of (image, position) pairs, one column each.
neuro::Matrix<float> render_batch(const std::vector<GridEnv>& envs, std::span<const int> image_ids,
                                  std::span<const AgentPos> positions);

/// Largest batch chunk whose im2col buffers stay under a fixed memory budget.
int max_chunk_for(const neuro::NetSpec& spec);

/// Bootstrapped targets for a batch of successor states, computed without a cache
/// (no gradient flows through them).
template <typename S>
neuro::Vector<S> td_targets(const neuro::NetParams<S>& params, const neuro::Matrix<S>& next_states,
                            std::span<const double> rewards, double gamma) {
  const neuro::Matrix<S> next_q = neuro::forward(params, next_states);
  neuro::Vector<S> out(next_q.cols());
  for (Eigen::Index i = 0; i < next_q.cols(); ++i)
    out[i] = static_cast<S>(td_target(rewards[i], next_q.col(i).template cast<double>(), gamma));
  return out;
}

/// L1 batch loss where the target equals the prediction except at the taken action.
/// Fills `grads` with the gradient of that loss; the batch is processed in chunks of
/// at most `chunk` columns, accumulated in order.
template <typename S>
S masked_l1_loss(const neuro::NetParams<S>& params, const neuro::Matrix<S>& states, std::span<const Action> actions,
                 const neuro::Vector<S>& targets, neuro::Cache<S>& cache, neuro::NetParams<S>& grads, int chunk) {
  const Eigen::Index n = states.cols();
  if (n == 0) throw UsageError("masked_l1_loss: empty batch");
  S loss = 0;
  for (Eigen::Index c0 = 0; c0 < n; c0 += chunk) {
    const Eigen::Index m = std::min<Eigen::Index>(chunk, n - c0);
    const neuro::Matrix<S> pred =
        m == n ? neuro::forward(params, states, &cache) : neuro::forward(params, neuro::Matrix<S>(states.middleCols(c0, m)), &cache);
    neuro::Matrix<S> target = pred;
    for (Eigen::Index j = 0; j < m; ++j) target(action_index(actions[c0 + j]), j) = targets[c0 + j];
    neuro::Matrix<S> grad;
    const S part = neuro::l1_batch_loss(pred, target, &grad);
    const S weight = static_cast<S>(m) / static_cast<S>(n);
    loss += part * weight;
    grad *= weight;
    neuro::backward(params, cache, grad, grads, c0 > 0);
  }
  return loss;
}

/// Fraction of environments whose greedy rollout of `steps` from the top-left block
/// ends on the lesion.
double evaluate(const neuro::NetParams<float>& params, const std::vector<GridEnv>& envs, int steps = 20);
double evaluate_policy(std::vector<GridEnv>& envs, const Policy& policy, int steps = 20);

struct EpisodeSummary {
  int image_id = 0;
  double epsilon = 0.0;
  double mean_reward = 0.0;
  std::optional<double> mean_loss;  // empty while the buffer holds fewer than `batch` items
  int updates = 0;
};

/// Online deep Q-learning over a set of training environments.
class DqnTrainer {
 public:
  DqnTrainer(std::vector<GridEnv> train_envs, const Hyperparams& hp);

  /// One gradient update from a uniformly sampled batch; nullopt (no update) while
  /// the buffer is smaller than the batch size.
  std::optional<double> train_step();
  /// Draws one training image, runs steps_per_episode epsilon-greedy steps, pushing
  /// every transition and training after each step.
  EpisodeSummary run_episode();

  const neuro::NetParams<float>& params() const { return params_; }
  neuro::NetParams<float>& params() { return params_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  ReplayBuffer& buffer() { return buffer_; }
  const Hyperparams& hyperparams() const { return hp_; }
  const std::vector<GridEnv>& envs() const { return envs_; }
  int episodes_done() const { return episode_; }
  std::int64_t env_steps() const { return env_steps_; }

 private:
  std::vector<GridEnv> envs_;
  Hyperparams hp_;
  neuro::NetParams<float> params_;
  neuro::AdamState<float> adam_;
  neuro::NetParams<float> grads_;
  neuro::Cache<float> cache_;
  ReplayBuffer buffer_;
  Rng rng_;
  int chunk_;
  int episode_ = 0;
  std::int64_t env_steps_ = 0;
};

/// Trains for hp.episodes episodes, evaluating on `test_envs` after each one and
/// reporting a metrics row per episode to `sink`.
neuro::NetParams<float> train_dqn(const std::vector<GridEnv>& train_envs, const std::vector<GridEnv>& test_envs,
                                  const Hyperparams& hp, const MetricsSink& sink);

}  // namespace gridloc
