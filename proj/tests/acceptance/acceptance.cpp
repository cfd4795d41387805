// Acceptance checks. Usage: acceptance [N ...] [--work DIR] [--cli PATH] [--reuse]
// Prints one "C<N> PASS|FAIL" line per criterion; exit status 1 if any failed.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/core.h>

#include "gridloc/agent_dqn.hpp"
#include "gridloc/data_io.hpp"
#include "gridloc/error.hpp"
#include "gridloc/experiment.hpp"
#include "gridloc/neuro/gradcheck.hpp"
#include "gridloc/oracle.hpp"
#include "gridloc/random.hpp"
#include "gridloc/stats.hpp"
#include "reference_stats.hpp"

namespace fs = std::filesystem;
using namespace gridloc;

namespace {

struct Options {
  fs::path work = fs::temp_directory_path() / "gridloc_acceptance";
  fs::path cli = GRIDLOC_CLI_PATH;
  bool reuse = false;
};

struct Outcome {
  bool pass = true;
  std::string detail;

  // Records one sub-check; the outcome passes only if all of them do.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

GridEnv env_of(const Case& c) { return GridEnv(GridSpec{}, c.image, c.mask); }

// 1. Exact solvers on ten synthetic images.
Outcome oracle_fixed_points(const Options&) {
  const auto t0 = std::chrono::steady_clock::now();
  SynthConfig sc;
  sc.count = 10;
  const Dataset ds = gen_synthetic(sc).dataset;
  double stay_err = 0.0, bi_gap = 0.0;
  int cells = 0;
  for (const auto& c : ds.items) {
    const GridEnv env = env_of(c);
    const QTable vi = value_iteration(env, 0.99, 1e-12);
    for (int r = 0; r < 4; ++r)
      for (int q = 0; q < 4; ++q)
        if (env.overlaps_at({r, q})) {
          stay_err = std::max(stay_err, std::abs(vi.q({r, q}, Action::Stay) - 100.0));
          ++cells;
        }
    bi_gap = std::max(bi_gap, backward_induction(env, 0.99, 500).back().max_abs_diff(vi));
  }
  const double secs = seconds_since(t0);
  Outcome o;
  o.check(stay_err <= 1e-6, fmt::format("max |Q*(s,Stay)-100| = {:.3g} over {} lesion cells (tol 1e-6)", stay_err, cells));
  o.check(bi_gap <= 1e-4, fmt::format("max |BI500 - VI| = {:.6f} (tol 1e-4; 100*0.99^500 = {:.6f})", bi_gap,
                                      100.0 * std::pow(0.99, 500)));
  o.check(secs < 5.0, fmt::format("{:.2f}s < 5s", secs));
  return o;
}

// 2. Tabular Q-learning reaches Q* on the states the optimal policy visits.
Outcome tabular_equivalence(const Options&) {
  const auto t0 = std::chrono::steady_clock::now();
  SynthConfig sc;
  sc.count = 1;
  const Dataset ds = gen_synthetic(sc).dataset;
  const GridEnv env = env_of(ds.items[0]);
  const QTable vi = value_iteration(env, 0.99, 1e-12);
  TabularConfig cfg;  // epsilon 0.3, alpha 0.1, 50000 iterations
  Rng rng(derive_seed(sc.seed, seed_stream::kTabular));
  const QTable q = tabular_q_learning(env, cfg, rng);
  const std::vector<AgentPos> path = greedy_path(vi, env, cfg.steps_per_episode);
  double on_path = 0.0, everywhere = q.max_abs_diff(vi);
  for (const auto& p : path)
    for (Action a : kActions) on_path = std::max(on_path, std::abs(q.q(p, a) - vi.q(p, a)));
  const double secs = seconds_since(t0);
  Outcome o;
  o.check(on_path < 0.01, fmt::format("max |Q-Q*| = {:.3g} on {} optimal-path states, all actions (tol 0.01)",
                                      on_path, path.size()));
  o.detail += fmt::format(" (all 16 states: {:.3g})", everywhere);
  o.check(secs < 10.0, fmt::format("{:.2f}s < 10s", secs));
  return o;
}

// 3. Finite-difference check of the full Q network at 60x60.
Outcome gradient_correctness(const Options&) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto report = neuro::gradient_check(neuro::NetSpec::dqn(60, 60), 1e-4);
  const double secs = seconds_since(t0);
  Outcome o;
  std::int64_t checked = 0;
  std::string worst;
  double worst_err = -1.0;
  for (const auto& t : report.tensors) {
    checked += t.checked;
    if (t.max_rel_error > worst_err) {
      worst_err = t.max_rel_error;
      worst = t.name;
    }
    o.pass = o.pass && t.max_rel_error < 1e-4 && t.checked > 0;
  }
  o.check(o.pass, fmt::format("{} tensors, {} entries, max rel error {:.3g} ({}) < 1e-4", report.tensors.size(), checked,
                              worst_err, worst));
  o.check(secs < 120.0, fmt::format("{:.1f}s < 120s", secs));
  return o;
}

// 4. Every (position, action) pair on a hand-built mask.
Outcome transition_table(const Options&) {
  const GridSpec spec;
  Mask mask = Mask::Zero(240, 240);
  mask(60 + 59, 120) = 1;                  // a single pixel in block (1,2)
  mask.block(190, 200, 20, 30).setOnes();  // block (3,3)
  mask.block(150, 10, 5, 5).setOnes();     // block (2,0)
  const bool lesion[4][4] = {{0, 0, 0, 0}, {0, 0, 1, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}};
  GridEnv env(spec, Image::Zero(240, 240), mask);
  int passed = 0, total = 0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      for (Action a : kActions) {
        AgentPos next{r, c};
        if (a == Action::Down) next.row = std::min(r + 1, 3);
        if (a == Action::Right) next.col = std::min(c + 1, 3);
        const bool in = lesion[next.row][next.col];
        const double expect = a == Action::Stay ? (in ? 1.0 : -2.0) : (in ? 1.0 : -0.5);
        env.set_pos({r, c});
        const double got = env.step(a).reward;
        ++total;
        passed += got == expect && env.pos() == next;
      }
  Outcome o;
  o.check(passed == 48 && total == 48, fmt::format("{}/{} transitions match", passed, total));
  return o;
}

int run_cli(const Options& opt, const std::string& args, const fs::path& log) {
  const std::string cmd = fmt::format("\"{}\" {} > \"{}\" 2>&1", opt.cli.string(), args, log.string());
  return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return {};
  return {std::istreambuf_iterator<char>(in), {}};
}

bool ensure_data(const Options& opt, Outcome& o) {
  const fs::path data = opt.work / "data";
  if (fs::exists(data / "manifest.txt")) return true;
  fs::create_directories(opt.work);
  const int rc = run_cli(opt, fmt::format("gen-synthetic --out \"{}\" --seed 7 --count 60 --train 30", data.string()),
                         opt.work / "gen.log");
  o.check(rc == 0, fmt::format("gen-synthetic exit {}", rc));
  return rc == 0;
}

int run_compare(const Options& opt, const std::string& name) {
  const fs::path out = opt.work / name;
  fs::remove_all(out);
  return run_cli(opt,
                 fmt::format("compare --data \"{}\" --out \"{}\" --seed 0 --scale 4", (opt.work / "data").string(),
                             out.string()),
                 opt.work / (name + ".log"));
}

std::map<std::string, double> read_report(const fs::path& path) {
  std::map<std::string, double> out;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    try {
      out[line.substr(0, eq)] = std::stod(line.substr(eq + 3));
    } catch (const std::exception&) {
    }
  }
  return out;
}

// 5. End-to-end comparison on the pinned synthetic set.
Outcome end_to_end(const Options& opt) {
  Outcome o;
  if (!ensure_data(opt, o)) return o;
  const auto t0 = std::chrono::steady_clock::now();
  const int rc = run_compare(opt, "run1");
  const double secs = seconds_since(t0);
  o.check(rc == 0, fmt::format("compare exit {}", rc));
  if (rc != 0) return o;
  auto r = read_report(opt.work / "run1" / artifact::kReport);
  const double dqn = r["dqn.last_mean"], sup = r["supervised.last_mean"];
  o.check(dqn >= 0.60, fmt::format("dqn last-20 {:.4f} >= 0.60", dqn));
  o.check(r["dqn.slope"] > 0.0, fmt::format("dqn slope {:.3g} > 0", r["dqn.slope"]));
  o.check(sup <= dqn - 0.25, fmt::format("supervised last-20 {:.4f} <= dqn - 0.25", sup));
  const int div = r.count("supervised.divergence_epoch") ? static_cast<int>(r["supervised.divergence_epoch"]) : 0;
  o.check(div >= 1 && div < 20, fmt::format("loss divergence epoch {} < 20", div));
  o.check(r.count("t_test.p") && r["t_test.p"] < 0.01, fmt::format("t-test p {:.3g} < 0.01", r["t_test.p"]));
  o.check(secs <= 1800.0, fmt::format("{:.0f}s <= 1800s", secs));
  return o;
}

// 6. Two compare runs with the same inputs give identical outputs.
Outcome determinism(const Options& opt) {
  Outcome o;
  if (!ensure_data(opt, o)) return o;
  const fs::path a = opt.work / "run1", b = opt.work / "run2";
  if (!(opt.reuse && fs::exists(a / artifact::kReport))) {
    const int rc = run_compare(opt, "run1");
    o.check(rc == 0, fmt::format("first compare exit {}", rc));
    if (rc != 0) return o;
  }
  const int rc = run_compare(opt, "run2");
  o.check(rc == 0, fmt::format("second compare exit {}", rc));
  if (rc != 0) return o;
  for (const char* name : {artifact::kDqnMetrics, artifact::kSupervisedMetrics, artifact::kBaselineLoss,
                           artifact::kReport, artifact::kDqnCheckpoint, artifact::kSupervisedCheckpoint}) {
    const std::string x = slurp(a / name), y = slurp(b / name);
    o.check(!x.empty() && x == y, fmt::format("{} identical", name));
  }
  return o;
}

// 7. Replay memory eviction order and sampling uniformity.
Outcome replay_buffer(const Options&) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  ReplayBuffer buf(100);
  for (int i = 0; i < 250; ++i) buf.push(Transition{i, {0, 0}, Action::Stay, 0.0, {0, 0}});
  bool fifo = buf.size() == 100 && buf.pushed() == 250;
  for (std::size_t i = 0; i < buf.size(); ++i) fifo = fifo && buf[i].image_id == 150 + static_cast<int>(i);
  o.check(fifo, "holds the newest 100 of 250 in order");

  Rng rng(derive_seed(0, 77));
  std::vector<int> counts(100, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[buf.sample_index(rng)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - draws / 100.0) * (c - draws / 100.0) / (draws / 100.0);
  const double crit = boost::math::quantile(boost::math::complement(boost::math::chi_squared(99), 0.001));
  o.check(chi2 < crit, fmt::format("chi2 {:.1f} < {:.1f} (df 99, alpha 0.001)", chi2, crit));
  const double secs = seconds_since(t0);
  o.check(secs < 5.0, fmt::format("{:.2f}s < 5s", secs));
  return o;
}

// 8. linfit and t_test against long double references.
Outcome statistics(const Options&) {
  std::mt19937_64 rng(derive_seed(8, 0));
  double fit_err = 0.0, t_err = 0.0;
  for (int k = 0; k < 20; ++k) {
    // Accuracy-like series: 90 rows of k/30 values, two last-20 windows.
    std::binomial_distribution<int> hits(30, 0.2 + 0.03 * k);
    std::binomial_distribution<int> other(30, 0.15 + 0.01 * k);
    std::vector<double> x, y, a, b;
    for (int i = 1; i <= 90; ++i) {
      x.push_back(20.0 * i);
      y.push_back(hits(rng) / 30.0);
    }
    for (int i = 0; i < 20; ++i) {
      a.push_back(hits(rng) / 30.0);
      b.push_back(other(rng) / 30.0);
    }
    const auto lref = testing::linfit_oracle(x, y);
    const LineFit f = linfit(x, y);
    fit_err = std::max({fit_err, std::abs(f.slope - static_cast<double>(lref.slope)),
                        std::abs(f.intercept - static_cast<double>(lref.intercept))});
    const auto tref = testing::welch_oracle(a, b);
    const TTest t = t_test(a, b);
    t_err = std::max({t_err, std::abs(t.t - static_cast<double>(tref.t)) / std::max(1.0, std::fabs(static_cast<double>(tref.t))),
                      std::abs(t.df - static_cast<double>(tref.df)) / static_cast<double>(tref.df),
                      std::abs(t.p - static_cast<double>(tref.p))});
  }
  Outcome o;
  o.check(fit_err < 1e-10, fmt::format("linfit max error {:.3g} < 1e-10", fit_err));
  o.check(t_err < 1e-9, fmt::format("t_test max error {:.3g} < 1e-9", t_err));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Outcome(const Options&)>>> criteria{
      {1, {"oracle fixed points", oracle_fixed_points}},
      {2, {"tabular Q-learning equivalence", tabular_equivalence}},
      {3, {"gradient correctness", gradient_correctness}},
      {4, {"reward/transition table", transition_table}},
      {5, {"end-to-end comparison", end_to_end}},
      {6, {"determinism", determinism}},
      {7, {"replay buffer", replay_buffer}},
      {8, {"statistics oracles", statistics}},
  };
  Options opt;
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--work" && i + 1 < argc) opt.work = argv[++i];
    else if (arg == "--cli" && i + 1 < argc) opt.cli = argv[++i];
    else if (arg == "--reuse") opt.reuse = true;
    else if (!arg.empty() && std::isdigit(static_cast<unsigned char>(arg[0])) && criteria.count(std::stoi(arg)))
      selected.push_back(std::stoi(arg));
    else {
      fmt::print(stderr, "usage: acceptance [1-8 ...] [--work DIR] [--cli PATH] [--reuse]\n");
      return 2;
    }
  }
  if (selected.empty())
    for (const auto& [n, c] : criteria) selected.push_back(n);
  // Criterion 6 can reuse the run made by criterion 5 in the same invocation.
  if (std::find(selected.begin(), selected.end(), 5) != selected.end()) opt.reuse = true;

  bool all = true;
  for (int n : selected) {
    const auto& [name, fn] = criteria.at(n);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn(opt);
    } catch (const std::exception& e) {
      o.check(false, fmt::format("exception: {}", e.what()));
    }
    all = all && o.pass;
    fmt::print("C{} {} {} ({:.1f}s): {}\n", n, o.pass ? "PASS" : "FAIL", name, seconds_since(t0), o.detail);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
