// gridloc command-line tool.
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "gridloc/baseline.hpp"
#include "gridloc/config.hpp"
#include "gridloc/data_io.hpp"
#include "gridloc/error.hpp"
#include "gridloc/experiment.hpp"
#include "gridloc/log.hpp"
#include "gridloc/neuro/checkpoint.hpp"
#include "gridloc/neuro/gradcheck.hpp"
#include "gridloc/oracle.hpp"
#include "gridloc/plot.hpp"

namespace {

using namespace gridloc;

/// Flags shared by the run-style subcommands; unset flags leave the config alone.
struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> data;
  std::optional<std::string> out;
  std::optional<int> episodes;
  std::optional<int> scale;
  std::optional<std::string> method;

  void add_to(CLI::App* cmd, bool with_method) {
    cmd->add_option("--config", config, "key = value configuration file");
    cmd->add_option("--seed", seed, "run seed");
    cmd->add_option("--data", data, "dataset root holding train/ and test/");
    cmd->add_option("--out", out, "output directory");
    cmd->add_option("--episodes", episodes, "DQN episodes and supervised epochs");
    cmd->add_option("--scale", scale, "render scale (average-pool factor)");
    if (with_method) cmd->add_option("--method", method, "dqn, supervised or both");
  }

  RunConfig resolve() const {
    RunConfig cfg = config.empty() ? RunConfig{} : parse_config_file(config);
    const auto flag = [&cfg](const char* key, const std::string& value) {
      try {
        set_config_value(cfg, key, value);
      } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("--{}", e.what()));
      }
    };
    if (seed) flag("seed", std::to_string(*seed));
    if (data) flag("data", *data);
    if (out) flag("out", *out);
    if (episodes) {
      flag("episodes", std::to_string(*episodes));
      flag("baseline_epochs", std::to_string(*episodes));
    }
    if (scale) flag("render_scale", std::to_string(*scale));
    if (method) flag("method", *method);
    cfg.validate();
    return cfg;
  }
};

void print_report(const ExperimentResult& r) { std::cout << report_text(r.summary); }

int run(int argc, char** argv) {
  CLI::App app{"Gridworld deep Q-learning lesion localization"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen-synthetic", "write a seeded synthetic dataset");
  SynthConfig synth;
  std::string gen_out = "data";
  int n_train = 30;
  gen->add_option("--out", gen_out, "output root (train/, test/, manifest.txt)");
  gen->add_option("--seed", synth.seed, "dataset seed");
  gen->add_option("--count", synth.count, "number of cases");
  gen->add_option("--train", n_train, "cases in the training split");

  CommonFlags dqn_flags, sup_flags, cmp_flags;
  auto* train_dqn_cmd = app.add_subcommand("train-dqn", "train the deep Q-network");
  dqn_flags.add_to(train_dqn_cmd, false);
  auto* train_sup_cmd = app.add_subcommand("train-baseline", "train the supervised keypoint baseline");
  sup_flags.add_to(train_sup_cmd, false);
  auto* compare_cmd = app.add_subcommand("compare", "train both methods and write the comparison report");
  cmp_flags.add_to(compare_cmd, true);

  auto* eval_cmd = app.add_subcommand("eval", "accuracy of a saved checkpoint on a dataset directory");
  std::string eval_ckpt, eval_data, eval_method = "dqn";
  int eval_scale = 1;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "directory of image/mask pairs")->required();
  eval_cmd->add_option("--method", eval_method, "dqn or supervised");
  eval_cmd->add_option("--scale", eval_scale, "render scale used in training");

  auto* plot_cmd = app.add_subcommand("plot", "redraw the comparison chart from a run directory");
  std::string plot_out = "out";
  plot_cmd->add_option("--out", plot_out, "run directory");

  auto* oracle_cmd = app.add_subcommand("oracle-dump", "exact Q* table for one case");
  std::string oracle_data, oracle_case, oracle_out;
  double oracle_gamma = 0.99;
  oracle_cmd->add_option("--data", oracle_data, "directory of image/mask pairs")->required();
  oracle_cmd->add_option("--case", oracle_case, "case id (default: first)");
  oracle_cmd->add_option("--gamma", oracle_gamma, "discount factor");
  oracle_cmd->add_option("--out", oracle_out, "CSV file (default: stdout)");

  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference check of the DQN gradients");
  int grad_scale = 4;
  std::uint64_t grad_seed = 1;
  double grad_tol = 1e-4;
  std::int64_t grad_max = 0;
  grad_cmd->add_option("--scale", grad_scale, "render scale");
  grad_cmd->add_option("--seed", grad_seed, "seed");
  grad_cmd->add_option("--tolerance", grad_tol, "max relative error");
  grad_cmd->add_option("--max-per-tensor", grad_max, "sampled entries per tensor (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorKind::Config);
  }

  if (gen->parsed()) {
    const SynthDataset ds = gen_synthetic(synth);
    auto [train, test] = split(ds.dataset, n_train, synth.seed);
    const std::filesystem::path root = gen_out;
    write_dataset(train, root / "train");
    write_dataset(test, root / "test");
    write_text_file(root / "manifest.txt", manifest_text(ds));
    log_info("wrote {} train and {} test cases to {}", train.size(), test.size(), root.string());
  } else if (train_dqn_cmd->parsed()) {
    RunConfig cfg = dqn_flags.resolve();
    cfg.method = MethodSelection::Dqn;
    print_report(run_experiment(cfg));
  } else if (train_sup_cmd->parsed()) {
    RunConfig cfg = sup_flags.resolve();
    cfg.method = MethodSelection::Supervised;
    print_report(run_experiment(cfg));
  } else if (compare_cmd->parsed()) {
    print_report(run_experiment(cmp_flags.resolve()));
  } else if (eval_cmd->parsed()) {
    const Dataset ds = load_dataset(eval_data);
    if (eval_scale < 1) throw ConfigError("--scale must be >= 1");
    const int h = ds.spec.image_height / eval_scale, w = ds.spec.image_width / eval_scale;
    double acc = 0.0;
    if (eval_method == "dqn") {
      const auto params = neuro::load_checkpoint(eval_ckpt, neuro::NetSpec::dqn(h, w));
      acc = evaluate(params, make_envs(ds, EnvOptions{1, eval_scale}));
    } else if (eval_method == "supervised") {
      const auto params = neuro::load_checkpoint(eval_ckpt, neuro::NetSpec::keypoint(h, w));
      acc = baseline_accuracy(params, ds, eval_scale);
    } else {
      throw ConfigError(fmt::format("--method: expected dqn or supervised, got '{}'", eval_method));
    }
    std::cout << fmt::format("accuracy = {}\n", acc);
  } else if (plot_cmd->parsed()) {
    const std::filesystem::path dir = plot_out;
    RunMetrics dqn{Method::Dqn, {}}, sup{Method::Supervised, {}};
    if (std::filesystem::exists(dir / artifact::kDqnMetrics)) dqn = read_metrics_csv(dir / artifact::kDqnMetrics, Method::Dqn);
    if (std::filesystem::exists(dir / artifact::kSupervisedMetrics))
      sup = read_metrics_csv(dir / artifact::kSupervisedMetrics, Method::Supervised);
    if (dqn.rows.empty() && sup.rows.empty()) throw DataError(fmt::format("no metrics CSVs in {}", dir.string()));
    plot_svg(dqn, sup, dir / artifact::kPlot);
  } else if (oracle_cmd->parsed()) {
    const Dataset ds = load_dataset(oracle_data);
    const Case* c = &ds.items.front();
    if (!oracle_case.empty()) {
      c = nullptr;
      for (const Case& item : ds.items)
        if (item.id == oracle_case) c = &item;
      if (c == nullptr) throw DataError(fmt::format("no case '{}' in {}", oracle_case, oracle_data));
    }
    const GridEnv env(ds.spec, c->image, c->mask);
    const std::string csv = qtable_csv(value_iteration(env, oracle_gamma));
    if (oracle_out.empty()) std::cout << csv;
    else write_text_file(oracle_out, csv);
  } else if (grad_cmd->parsed()) {
    if (grad_scale < 1 || 240 % grad_scale != 0) throw ConfigError("--scale must divide 240");
    neuro::GradCheckOptions opts;
    opts.seed = grad_seed;
    opts.max_per_tensor = grad_max;
    const auto rep = neuro::gradient_check(neuro::NetSpec::dqn(240 / grad_scale, 240 / grad_scale), grad_tol, opts);
    std::cout << neuro::format_report(rep);
    if (!rep.passed) throw NumericalError(fmt::format("gradient check failed: max relative error {}", rep.max_rel_error));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gridloc::Error& e) {
    gridloc::log_error("{}", e.what());
    return gridloc::exit_code(e.kind());
  } catch (const std::exception& e) {
    gridloc::log_error("{}", e.what());
    return 1;
  }
}
