#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "gridloc/baseline.hpp"
#include "gridloc/error.hpp"

using namespace gridloc;

namespace {

Dataset synth(int count, std::uint64_t seed = 7) {
  SynthConfig cfg;
  cfg.count = count;
  cfg.seed = seed;
  return gen_synthetic(cfg).dataset;
}

}  // namespace

TEST_CASE("centroid examples") {
  Mask m = Mask::Zero(240, 240);
  m(130, 130) = 1;
  Keypoint k = centroid(m);
  CHECK(k.row == doctest::Approx(130.0 / 239.0).epsilon(1e-15));
  CHECK(k.col == doctest::Approx(130.0 / 239.0).epsilon(1e-15));

  m.setOnes();
  k = centroid(m);
  CHECK(k.row == doctest::Approx(0.5));
  CHECK(k.col == doctest::Approx(0.5));

  m.setZero();
  m(0, 239) = 1;
  m(10, 239) = 1;
  k = centroid(m);
  CHECK(k.row == doctest::Approx(5.0 / 239.0));
  CHECK(k.col == doctest::Approx(1.0));

  CHECK_THROWS_AS(centroid(Mask::Zero(240, 240)), DataError);
}

TEST_CASE("centroid agrees with a scalar loop") {
  std::mt19937 rng(5);
  std::bernoulli_distribution on(0.1);
  for (int trial = 0; trial < 10; ++trial) {
    Mask m(240, 240);
    for (int r = 0; r < 240; ++r)
      for (int c = 0; c < 240; ++c) m(r, c) = on(rng) ? 1 : 0;
    long double sr = 0, sc = 0;
    long n = 0;
    for (int r = 0; r < 240; ++r)
      for (int c = 0; c < 240; ++c)
        if (m(r, c)) {
          sr += r;
          sc += c;
          ++n;
        }
    const Keypoint k = centroid(m);
    CHECK(std::abs(k.row - static_cast<double>(sr / n / 239)) < 1e-12);
    CHECK(std::abs(k.col - static_cast<double>(sc / n / 239)) < 1e-12);
  }
}

TEST_CASE("keypoint_block clips and scales by H-1") {
  const GridSpec spec;
  CHECK(keypoint_block(spec, {0.0, 0.0}) == AgentPos{0, 0});
  CHECK(keypoint_block(spec, {1.0, 1.0}) == AgentPos{3, 3});
  CHECK(keypoint_block(spec, {-0.4, 2.0}) == AgentPos{0, 3});
  // 0.5 * 239 = 119.5 -> pixel 119 -> block 1.
  CHECK(keypoint_block(spec, {0.5, 0.5}) == AgentPos{1, 1});
  // 60 / 239 lands exactly on pixel 60, the first pixel of block 1.
  CHECK(keypoint_block(spec, {60.0 / 239.0, 59.0 / 239.0}) == AgentPos{1, 0});
}

TEST_CASE("keypoint accuracy: perfect, blind and order invariant") {
  const Dataset ds = synth(40);
  std::vector<Keypoint> perfect, corner;
  for (const auto& c : ds.items) {
    perfect.push_back(centroid(c.mask));
    corner.push_back({0.0, 0.0});
  }
  // Synthetic lesions are convex, so the centroid pixel lies in the lesion.
  CHECK(keypoint_accuracy(ds, perfect) == 1.0);
  CHECK(keypoint_accuracy(ds, corner) == 0.0);

  std::vector<Keypoint> mixed = perfect;
  for (std::size_t i = 0; i < mixed.size(); i += 4) mixed[i] = {0.0, 0.0};
  const double acc = keypoint_accuracy(ds, mixed);
  CHECK(acc == doctest::Approx(30.0 / 40.0));

  Dataset shuffled = ds;
  std::vector<std::size_t> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937(1));
  std::vector<Keypoint> preds;
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled.items[i] = ds.items[order[i]];
    preds.push_back(mixed[order[i]]);
  }
  CHECK(keypoint_accuracy(shuffled, preds) == acc);

  CHECK_THROWS_AS(keypoint_accuracy(ds, std::span(perfect).first(3)), UsageError);
  CHECK_THROWS_AS(keypoint_accuracy(Dataset{}, {}), ConfigError);
}

TEST_CASE("keypoint network shares the DQN backbone") {
  for (int side : {240, 60}) {
    const auto dqn = neuro::NetSpec::dqn(side, side);
    const auto kp = neuro::NetSpec::keypoint(side, side);
    CHECK(dqn.backbone_parameter_count() == kp.backbone_parameter_count());
    CHECK(dqn.input_size() == kp.input_size());
    CHECK(kp.output_size() == 2);
    CHECK(dqn.parameter_count() - kp.parameter_count() == 65);  // one more head row: 64 weights + bias
  }
}

TEST_CASE("keypoint inputs and targets") {
  const Dataset ds = synth(3);
  const auto x = keypoint_inputs(ds, 4);
  CHECK(x.rows() == 60 * 60 * 2);
  CHECK(x.cols() == 3);
  // Agent channel (odd HWC slots) is empty; image channel is the 4x4 average.
  double agent = 0.0;
  for (Eigen::Index i = 1; i < x.rows(); i += 2) agent += std::abs(x(i, 0));
  CHECK(agent == 0.0);
  CHECK(x(0, 1) == doctest::Approx(ds.items[1].image.block(0, 0, 4, 4).mean()));
  const auto y = keypoint_targets(ds);
  CHECK(y.rows() == 2);
  CHECK(y(0, 2) == doctest::Approx(centroid(ds.items[2].mask).row));
  CHECK(y(1, 2) == doctest::Approx(centroid(ds.items[2].mask).col));
}

TEST_CASE("baseline training fits two images and is deterministic") {
  const Dataset ds = synth(2);
  BaselineConfig cfg;
  cfg.epochs = 40;
  cfg.batch = 2;
  cfg.render_scale = 8;
  cfg.lr = 1e-3;
  int rows = 0;
  const auto a = train_baseline(ds, ds, cfg, [&](const MetricsRow& r) {
    ++rows;
    CHECK(r.step == rows);
    CHECK(r.train_loss.has_value());
  });
  CHECK(rows == 40);
  REQUIRE(a.history.size() == 40);
  CHECK(a.history.back().train_loss < 0.05 * a.history.front().train_loss);
  // Same data on both sides: the losses coincide.
  for (const auto& e : a.history) CHECK(e.train_loss == doctest::Approx(e.test_loss));
  CHECK(a.history.back().test_accuracy == 1.0);

  const auto b = train_baseline(ds, ds, cfg);
  for (std::size_t i = 0; i < a.history.size(); ++i) CHECK(a.history[i].train_loss == b.history[i].train_loss);
  for (std::size_t t = 0; t < a.params.tensors.size(); ++t) CHECK(a.params.tensors[t] == b.params.tensors[t]);

  cfg.seed = 1;
  const auto c = train_baseline(ds, ds, cfg);
  CHECK(c.history.front().train_loss != a.history.front().train_loss);
}

TEST_CASE("baseline argument errors") {
  BaselineConfig cfg;
  cfg.epochs = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.lr = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.batch = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);

  Dataset ds = synth(2);
  Dataset blank = ds;
  for (auto& c : blank.items) c.mask.setZero();
  CHECK_THROWS_AS(usable_cases(blank), ConfigError);
  blank.items[1] = ds.items[1];
  CHECK(usable_cases(blank).size() == 1);
  CHECK_THROWS_AS(train_baseline(Dataset{}, ds, BaselineConfig{}), ConfigError);
}

TEST_CASE("divergence epoch") {
  const auto hist = [](std::vector<std::pair<double, double>> losses) {
    std::vector<BaselineEpoch> h;
    for (std::size_t i = 0; i < losses.size(); ++i)
      h.push_back({static_cast<int>(i) + 1, losses[i].first, losses[i].second, 0.0});
    return h;
  };
  CHECK(divergence_epoch(hist({{1, 1}, {0.5, 0.6}, {0.3, 0.5}})) == 0);
  CHECK(divergence_epoch(hist({{1, 1}, {0.5, 1.1}, {0.2, 1.0}})) == 2);
  // A separation that closes again does not count.
  CHECK(divergence_epoch(hist({{1, 3}, {1, 1}, {0.2, 1.0}, {0.1, 1.0}})) == 3);
  CHECK(divergence_epoch(hist({{1, 3}, {1, 1}})) == 0);
  CHECK(divergence_epoch(hist({{1, 1.5}, {1, 1.5}}), 1.2) == 1);
  CHECK(divergence_epoch({}) == 0);
  CHECK_THROWS_AS(divergence_epoch({}, 1.0), ConfigError);

  const auto csv = baseline_history_csv(hist({{0.5, 0.25}}));
  CHECK(csv == "epoch,train_loss,test_loss,test_accuracy\n1,0.5,0.25,0\n");
}
