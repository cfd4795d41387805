#include "gridloc/experiment.hpp"

#include <filesystem>
#include <future>

#include <fmt/core.h>

#include "gridloc/error.hpp"
#include "gridloc/log.hpp"
#include "gridloc/neuro/checkpoint.hpp"
#include "gridloc/plot.hpp"

namespace gridloc {

namespace {

std::vector<double> tail(const std::vector<double>& v, int window) {
  return {v.end() - window, v.end()};
}

void require_window(const RunMetrics& m, int window) {
  if (window < 1) throw ConfigError(fmt::format("window must be >= 1, got {}", window));
  if (static_cast<int>(m.rows.size()) < window)
    throw ConfigError(fmt::format("window {} exceeds the {} rows of the {} series", window, m.rows.size(), method_tag(m.method)));
}

void put_summary(std::string& out, const char* tag, const MethodSummary& s) {
  out += fmt::format("{}.rows = {}\n", tag, s.rows);
  out += fmt::format("{}.last_mean = {}\n", tag, s.last_mean);
  out += fmt::format("{}.slope = {}\n", tag, s.fit.slope);
  out += fmt::format("{}.intercept = {}\n", tag, s.fit.intercept);
}

}  // namespace

MethodSummary summarize(const RunMetrics& metrics, int window) {
  require_window(metrics, window);
  const auto acc = metrics.accuracies();
  MethodSummary s;
  s.rows = static_cast<int>(acc.size());
  s.last_mean = mean(tail(acc, window));
  if (acc.size() >= 2) s.fit = linfit(metrics.steps(), acc);
  return s;
}

Report report(const RunMetrics* dqn, const RunMetrics* supervised, int window, std::optional<int> divergence_epoch) {
  if (dqn == nullptr && supervised == nullptr) throw UsageError("report: no series");
  Report r;
  r.window = window;
  r.partial = dqn == nullptr || supervised == nullptr;
  if (dqn != nullptr) r.dqn = summarize(*dqn, window);
  if (supervised != nullptr) r.supervised = summarize(*supervised, window);
  r.divergence_epoch = divergence_epoch;
  if (!r.partial && window >= 2) {
    const auto a = tail(dqn->accuracies(), window);
    const auto b = tail(supervised->accuracies(), window);
    if (variance(a) == 0.0 && variance(b) == 0.0) {
      if (mean(a) == mean(b)) r.test = TTest{0.0, 2.0 * (window - 1), 1.0};
    } else {
      r.test = t_test(a, b);
    }
  }
  return r;
}

std::string report_text(const Report& r) {
  std::string out = fmt::format("window = {}\npartial = {}\n", r.window, r.partial);
  if (r.dqn) put_summary(out, "dqn", *r.dqn);
  if (r.supervised) put_summary(out, "supervised", *r.supervised);
  if (r.divergence_epoch) out += fmt::format("supervised.divergence_epoch = {}\n", *r.divergence_epoch);
  if (r.dqn && r.supervised) out += fmt::format("accuracy_gap = {}\n", r.dqn->last_mean - r.supervised->last_mean);
  if (r.test) out += fmt::format("t_test.t = {}\nt_test.df = {}\nt_test.p = {}\n", r.test->t, r.test->df, r.test->p);
  return out;
}

ExperimentData load_experiment_data(const RunConfig& cfg) {
  ExperimentData d{load_dataset(cfg.data / "train"), load_dataset(cfg.data / "test")};
  return d;
}

RunMetrics run_dqn(const RunConfig& cfg, const ExperimentData& data, neuro::NetParams<float>* params_out) {
  RunMetrics metrics{Method::Dqn, {}};
  try {
    const EnvOptions eo{cfg.overlap_threshold, cfg.render_scale};
    auto params = train_dqn(make_envs(data.train, eo), make_envs(data.test, eo), cfg.dqn,
                            [&](const MetricsRow& row) { metrics.append(row); });
    if (params_out != nullptr) *params_out = std::move(params);
  } catch (const Error& e) {
    rethrow_with_context(e, "dqn");
  }
  return metrics;
}

BaselineResult run_supervised(const RunConfig& cfg, const ExperimentData& data, RunMetrics& metrics) {
  metrics = RunMetrics{Method::Supervised, {}};
  BaselineConfig bc;
  bc.epochs = cfg.baseline_epochs;
  bc.lr = cfg.baseline_lr;
  bc.batch = cfg.baseline_batch;
  bc.seed = cfg.dqn.seed;
  bc.render_scale = cfg.render_scale;
  bc.overlap_threshold = cfg.overlap_threshold;
  try {
    return train_baseline(data.train, data.test, bc, [&](const MetricsRow& row) { metrics.append(row); });
  } catch (const Error& e) {
    rethrow_with_context(e, "supervised");
  }
}

ExperimentResult run_experiment(const RunConfig& cfg, const ExperimentData& data) {
  cfg.validate();
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw ConfigError(fmt::format("out: cannot create {}: {}", cfg.out.string(), ec.message()));

  ExperimentResult result;
  neuro::NetParams<float> dqn_params;
  std::optional<BaselineResult> baseline;
  RunMetrics supervised_metrics;

  const auto dqn_job = [&] { result.dqn = run_dqn(cfg, data, &dqn_params); };
  const auto sup_job = [&] { baseline = run_supervised(cfg, data, supervised_metrics); };
  if (cfg.parallel && cfg.runs_dqn() && cfg.runs_supervised()) {
    auto sup = std::async(std::launch::async, sup_job);
    dqn_job();
    sup.get();
  } else {
    if (cfg.runs_dqn()) dqn_job();
    if (cfg.runs_supervised()) sup_job();
  }

  std::optional<int> divergence;
  if (baseline) {
    result.supervised = supervised_metrics;
    result.baseline_history = baseline->history;
    divergence = divergence_epoch(result.baseline_history);
  }
  result.summary = report(result.dqn ? &*result.dqn : nullptr, result.supervised ? &*result.supervised : nullptr,
                          cfg.window, divergence);

  const auto& out = cfg.out;
  if (result.dqn) {
    write_metrics_csv(*result.dqn, out / artifact::kDqnMetrics);
    neuro::save_checkpoint(dqn_params, out / artifact::kDqnCheckpoint);
  }
  if (baseline) {
    write_metrics_csv(*result.supervised, out / artifact::kSupervisedMetrics);
    write_text_file(out / artifact::kBaselineLoss, baseline_history_csv(result.baseline_history));
    neuro::save_checkpoint(baseline->params, out / artifact::kSupervisedCheckpoint);
  }
  write_text_file(out / artifact::kReport, report_text(result.summary));
  plot_svg(result.dqn.value_or(RunMetrics{Method::Dqn, {}}), result.supervised.value_or(RunMetrics{Method::Supervised, {}}),
           out / artifact::kPlot);
  write_text_file(out / artifact::kConfig, config_text(cfg));
  log_info("wrote run artifacts to {}", out.string());
  return result;
}

ExperimentResult run_experiment(const RunConfig& cfg) { return run_experiment(cfg, load_experiment_data(cfg)); }

}  // namespace gridloc
