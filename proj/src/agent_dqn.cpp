#include "gridloc/agent_dqn.hpp"

#include <algorithm>

#include <fmt/core.h>

#include "gridloc/error.hpp"
#include "gridloc/log.hpp"
#include "gridloc/random.hpp"

namespace gridloc {

void Hyperparams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError(fmt::format("gamma must be in (0,1), got {}", gamma));
  if (!(eps_init >= 0.0 && eps_init <= 1.0)) throw ConfigError(fmt::format("eps_init must be in [0,1], got {}", eps_init));
  if (!(eps_min >= 0.0 && eps_min <= eps_init))
    throw ConfigError(fmt::format("eps_min must be in [0, eps_init], got {}", eps_min));
  if (!(eps_decay >= 0.0)) throw ConfigError(fmt::format("eps_decay must be >= 0, got {}", eps_decay));
  if (!(lr > 0.0)) throw ConfigError(fmt::format("lr must be > 0, got {}", lr));
  if (batch < 1) throw ConfigError(fmt::format("batch must be >= 1, got {}", batch));
  if (memory < 1) throw ConfigError(fmt::format("memory must be >= 1, got {}", memory));
  if (batch > memory) throw ConfigError(fmt::format("batch ({}) exceeds memory ({})", batch, memory));
  if (steps_per_episode < 1) throw ConfigError(fmt::format("steps_per_episode must be >= 1, got {}", steps_per_episode));
  if (episodes < 1) throw ConfigError(fmt::format("episodes must be >= 1, got {}", episodes));
}

double epsilon_at(std::int64_t t, const Hyperparams& hp) {
  return std::max(hp.eps_min, hp.eps_init - static_cast<double>(t) * hp.eps_decay);
}

Action greedy_action(const QValues& q) {
  int best = 0;
  for (int a = 1; a < kNumActions; ++a)
    if (q[a] > q[best]) best = a;
  return action_from_index(best);
}

Action select_action(const QValues& q, double eps, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < eps) {
    std::uniform_int_distribution<int> pick(0, kNumActions - 1);
    return action_from_index(pick(rng));
  }
  return greedy_action(q);
}

double td_target(double reward, const QValues& next_q, double gamma) { return reward + gamma * next_q.maxCoeff(); }

ReplayBuffer::ReplayBuffer(std::size_t capacity) : items_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be >= 1");
}

void ReplayBuffer::push(const Transition& t) {
  if (size_ < items_.size()) {
    items_[(head_ + size_) % items_.size()] = t;
    ++size_;
  } else {
    items_[head_] = t;
    head_ = (head_ + 1) % items_.size();
  }
  ++pushed_;
}

const Transition& ReplayBuffer::operator[](std::size_t i) const {
  if (i >= size_) throw UsageError(fmt::format("replay buffer index {} >= size {}", i, size_));
  return items_[(head_ + i) % items_.size()];
}

std::size_t ReplayBuffer::sample_index(Rng& rng) const {
  if (size_ == 0) throw UsageError("sampling from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  return pick(rng);
}

std::vector<Transition> ReplayBuffer::contents() const {
  std::vector<Transition> out;
  out.reserve(size_);
  for (std::size_t i = 0; i < size_; ++i) out.push_back((*this)[i]);
  return out;
}

neuro::Matrix<float> render_batch(const std::vector<GridEnv>& envs, std::span<const int> image_ids,
                                  std::span<const AgentPos> positions) {
  if (envs.empty()) throw UsageError("render_batch: no environments");
  const int size = envs.front().state_size();
  neuro::Matrix<float> out(size, static_cast<Eigen::Index>(image_ids.size()));
  for (std::size_t i = 0; i < image_ids.size(); ++i) {
    const GridEnv& env = envs[image_ids[i]];
    write_state(env.pooled_image(), env.spec(), env.options().render_scale, positions[i],
                {out.col(static_cast<Eigen::Index>(i)).data(), static_cast<std::size_t>(size)});
  }
  return out;
}

int max_chunk_for(const neuro::NetSpec& spec) {
  constexpr std::int64_t kBudget = 16 * 1024 * 1024;  // floats per im2col buffer
  std::int64_t widest = 1;
  for (const auto& l : spec.layers())
    if (l.kind == neuro::LayerKind::Conv)
      widest = std::max<std::int64_t>(widest, static_cast<std::int64_t>(l.out.h) * l.out.w * l.in.c * 9);
  return static_cast<int>(std::max<std::int64_t>(1, kBudget / widest));
}

double evaluate(const neuro::NetParams<float>& params, const std::vector<GridEnv>& envs, int steps) {
  if (envs.empty()) throw ConfigError("evaluate: empty dataset");
  const int n = static_cast<int>(envs.size());
  std::vector<int> ids(n);
  for (int i = 0; i < n; ++i) ids[i] = i;
  std::vector<AgentPos> pos(n, AgentPos{0, 0});
  for (int t = 0; t < steps; ++t) {
    const neuro::Matrix<float> q = neuro::forward(params, render_batch(envs, ids, pos));
    for (int i = 0; i < n; ++i) pos[i] = envs[i].successor(pos[i], greedy_action(q.col(i).cast<double>()));
  }
  int hits = 0;
  for (int i = 0; i < n; ++i) hits += envs[i].overlaps_at(pos[i]) ? 1 : 0;
  return static_cast<double>(hits) / n;
}

double evaluate_policy(std::vector<GridEnv>& envs, const Policy& policy, int steps) {
  if (envs.empty()) throw ConfigError("evaluate: empty dataset");
  int hits = 0;
  for (auto& env : envs) hits += greedy_rollout(env, policy, steps).success ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(envs.size());
}

DqnTrainer::DqnTrainer(std::vector<GridEnv> train_envs, const Hyperparams& hp)
    : envs_(std::move(train_envs)),
      hp_(hp),
      buffer_(hp.memory > 0 ? static_cast<std::size_t>(hp.memory) : 1),
      rng_(derive_seed(hp.seed, seed_stream::kDqnTrain)) {
  hp_.validate();
  if (envs_.empty()) throw ConfigError("train-dqn: training dataset is empty");
  const GridEnv& e0 = envs_.front();
  for (const auto& e : envs_)
    if (!(e.spec() == e0.spec()) || e.options().render_scale != e0.options().render_scale)
      throw ConfigError("train-dqn: environments disagree on grid or render scale");
  const auto spec = neuro::NetSpec::dqn(e0.render_height(), e0.render_width());
  params_ = neuro::init_params<float>(spec, derive_seed(hp.seed, seed_stream::kDqnInit));
  adam_ = neuro::AdamState<float>::create(params_, {hp.lr, 0.9, 0.999, 1e-8});
  grads_ = neuro::zero_params<float>(spec);
  chunk_ = max_chunk_for(spec);
}

std::optional<double> DqnTrainer::train_step() {
  if (buffer_.size() < static_cast<std::size_t>(hp_.batch)) return std::nullopt;
  const auto n = static_cast<std::size_t>(hp_.batch);
  std::vector<int> ids(n);
  std::vector<AgentPos> pos(n), next(n);
  std::vector<Action> actions(n);
  std::vector<double> rewards(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = buffer_[buffer_.sample_index(rng_)];
    ids[i] = t.image_id;
    pos[i] = t.pos;
    next[i] = t.next_pos;
    actions[i] = t.action;
    rewards[i] = t.reward;
  }
  const auto targets = td_targets(params_, render_batch(envs_, ids, next), rewards, hp_.gamma);
  const float loss = masked_l1_loss(params_, render_batch(envs_, ids, pos), actions, targets, cache_, grads_, chunk_);
  neuro::adam_step(params_, grads_, adam_);
  if (!std::isfinite(loss)) throw NumericalError(fmt::format("train-dqn: non-finite loss at update {}", adam_.step));
  return loss;
}

EpisodeSummary DqnTrainer::run_episode() {
  EpisodeSummary s;
  std::uniform_int_distribution<int> pick(0, static_cast<int>(envs_.size()) - 1);
  s.image_id = pick(rng_);
  s.epsilon = epsilon_at(hp_.eps_decay_per_step ? env_steps_ : episode_, hp_);
  GridEnv& env = envs_[s.image_id];
  StateTensor state = env.reset();
  double reward_sum = 0.0, loss_sum = 0.0;
  for (int t = 0; t < hp_.steps_per_episode; ++t) {
    const double eps = hp_.eps_decay_per_step ? epsilon_at(env_steps_, hp_) : s.epsilon;
    const QValues q = neuro::forward_one(params_, neuro::Vector<float>(state.data)).cast<double>();
    const Action a = select_action(q, eps, rng_);
    const AgentPos before = env.pos();
    const double r = env.advance(a);
    buffer_.push({s.image_id, before, a, r, env.pos()});
    reward_sum += r;
    ++env_steps_;
    state = env.render_state();
    if (const auto loss = train_step()) {
      loss_sum += *loss;
      ++s.updates;
    }
  }
  s.mean_reward = reward_sum / hp_.steps_per_episode;
  if (s.updates > 0) s.mean_loss = loss_sum / s.updates;
  ++episode_;
  return s;
}

neuro::NetParams<float> train_dqn(const std::vector<GridEnv>& train_envs, const std::vector<GridEnv>& test_envs,
                                  const Hyperparams& hp, const MetricsSink& sink) {
  if (test_envs.empty()) throw ConfigError("train-dqn: test dataset is empty");
  DqnTrainer trainer(train_envs, hp);
  for (int e = 0; e < hp.episodes; ++e) {
    const EpisodeSummary s = trainer.run_episode();
    MetricsRow row;
    row.step = e + 1;
    row.epsilon = s.epsilon;
    row.mean_reward = s.mean_reward;
    row.train_loss = s.mean_loss;
    row.test_accuracy = evaluate(trainer.params(), test_envs, hp.steps_per_episode);
    log_debug("dqn episode {:3d} image {:2d} eps {:.4f} reward {:+.3f} loss {} acc {:.3f}", row.step, s.image_id,
              s.epsilon, s.mean_reward, s.mean_loss ? fmt::format("{:.4f}", *s.mean_loss) : "-", row.test_accuracy);
    if (sink) sink(row);
  }
  return trainer.params();
}

}  // namespace gridloc
