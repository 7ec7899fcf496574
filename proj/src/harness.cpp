#include "flatmin/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "flatmin/csv.hpp"
#include "flatmin/dataset.hpp"
#include "flatmin/errors.hpp"
#include "flatmin/hessian.hpp"
#include "flatmin/landscape.hpp"
#include "flatmin/parallel.hpp"
#include "flatmin/seeding.hpp"
#include "flatmin/theory.hpp"
#include "flatmin/train.hpp"

namespace flatmin {

using nlohmann::json;

namespace {

// JSON has no infinities; non-finite values are written as null.
json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json escape_json(const EscapeTime& e) {
  return {{"value", num(e.value)}, {"log_value", e.log_value}, {"overflowed", e.overflowed}};
}

json metrics_json(const EpochMetrics& m) {
  return {{"epoch", m.epoch},
          {"train_loss", num(m.train_loss)},
          {"train_acc", m.train_acc},
          {"test_loss", num(m.test_loss)},
          {"test_acc", m.test_acc}};
}

std::string metrics_csv(const std::vector<EpochMetrics>& metrics) {
  CsvWriter csv{"epoch", "train_loss", "train_acc", "test_loss", "test_acc"};
  for (const auto& m : metrics) {
    csv.cell(m.epoch).cell(m.train_loss).cell(m.train_acc).cell(m.test_loss).cell(m.test_acc);
    csv.end_row();
  }
  return csv.str();
}

Dataset build_dataset(const ExperimentConfig& cfg) {
  const auto& b = cfg.dataset;
  Dataset ds = b.kind == "idx" ? load_idx(b.images_path, b.labels_path, derive_seed(cfg.seed, "dataset"))
                               : make_blobs(b.blobs.classes, b.blobs.per_class, b.blobs.spread,
                                            derive_seed(cfg.seed, "dataset"), b.blobs.input_dim);
  if (b.noise_rate > 0.0) ds = inject_label_noise(ds, b.noise_rate, derive_seed(cfg.seed, "noise"));
  return ds;
}

MlpSpec build_model_spec(const ExperimentConfig& cfg, const Dataset& ds) {
  MlpSpec spec;
  spec.layer_sizes.push_back(ds.input_dim);
  for (auto h : cfg.model.hidden) spec.layer_sizes.push_back(h);
  spec.layer_sizes.push_back(static_cast<std::size_t>(ds.num_classes));
  spec.activation = cfg.model.activation;
  spec.init_seed = derive_seed(cfg.seed, "init");
  return spec;
}

struct Trained {
  OptimizerConfig resolved;
  TrainResult result;
};

std::vector<Trained> train_all(const ExperimentConfig& cfg, const Dataset& ds, const MlpSpec& spec) {
  const auto steps_per_epoch = batches_per_epoch(ds.train_idx.size(), cfg.training.batch_size);
  std::vector<Trained> out(cfg.optimizers.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].resolved = resolve_optimizer(cfg.optimizers[i], steps_per_epoch);
  parallel_for(out.size(), [&](std::size_t i) {
    out[i].result = train_classifier(spec, ds, out[i].resolved, cfg.schedule, cfg.training.epochs,
                                     cfg.training.batch_size, derive_seed(cfg.seed, "shuffle"));
  });
  return out;
}

json optimizer_summary(const OptimizerConfig& c) {
  json j{{"label", c.label}, {"name", c.kind_name()}, {"alpha", c.base_alpha()}};
  if (const auto* p = std::get_if<MIAdamHyperParams>(&c.params)) {
    j["switch_step"] = p->switch_step == kNeverSwitch ? json(nullptr) : json(p->switch_step);
    j["pre_switch_lr"] = p->pre_switch_lr();
  }
  return j;
}

void run_trajectory(const ExperimentConfig& cfg, RunOutput& out) {
  json results = json::array();
  std::vector<TrajectoryRecord> records(cfg.optimizers.size());
  parallel_for(records.size(), [&](std::size_t i) {
    records[i] = simulate_trajectory(cfg.landscape, cfg.trajectory.start, resolve_optimizer(cfg.optimizers[i]),
                                     cfg.schedule, cfg.trajectory.total_steps);
  });
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto resolved = resolve_optimizer(cfg.optimizers[i]);
    CsvWriter csv{"t", "theta1", "theta2", "loss"};
    for (const auto& s : rec.steps) {
      csv.cell(s.t).cell(s.theta[0]).cell(s.theta[1]).cell(s.loss);
      csv.end_row();
    }
    const std::string file = "trajectory_" + resolved.label + ".csv";
    out.files.push_back({file, csv.str()});
    json r = optimizer_summary(resolved);
    r["final_theta"] = rec.final_theta;
    r["final_loss"] = rec.steps.empty() ? landscape_eval(cfg.landscape, rec.final_theta).loss : rec.steps.back().loss;
    r["flatness"] = rec.flatness;
    r["converged_well"] = rec.converged_well ? json(*rec.converged_well) : json(nullptr);
    r["file"] = file;
    results.push_back(r);
  }
  out.report["results"] = {{"optimizers", results}};
}

void run_grid(const ExperimentConfig& cfg, RunOutput& out) {
  std::vector<OptimizerConfig> opts;
  for (const auto& b : cfg.optimizers) opts.push_back(resolve_optimizer(b));
  const auto starts = grid_starts(cfg.grid.region, cfg.grid.cols, cfg.grid.rows);
  const auto flat = grid_flatness_study(cfg.landscape, cfg.grid.region, cfg.grid.cols, cfg.grid.rows, opts,
                                        cfg.schedule, cfg.grid.total_steps);
  std::vector<std::string> header{"index", "theta1", "theta2"};
  for (const auto& o : opts) header.push_back(o.label);
  CsvWriter csv(header);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    csv.cell(s).cell(starts[s][0]).cell(starts[s][1]);
    for (const auto& col : flat) csv.cell(col[s]);
    csv.end_row();
  }
  out.files.push_back({"flatness.csv", csv.str()});
  json results = json::array();
  for (std::size_t i = 0; i < opts.size(); ++i) {
    const auto& v = flat[i];
    double sum = 0.0;
    for (double x : v) sum += x;
    json r = optimizer_summary(opts[i]);
    r["mean_flatness"] = v.empty() ? 0.0 : sum / static_cast<double>(v.size());
    r["min_flatness"] = v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
    r["max_flatness"] = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
    r["flatness"] = v;
    results.push_back(r);
  }
  out.report["results"] = {{"starts", starts.size()}, {"file", "flatness.csv"}, {"optimizers", results}};
}

void run_train(const ExperimentConfig& cfg, RunOutput& out) {
  const Dataset ds = build_dataset(cfg);
  const MlpSpec spec = build_model_spec(cfg, ds);
  const auto trained = train_all(cfg, ds, spec);
  json results = json::array();
  for (const auto& t : trained) {
    const std::string file = "metrics_" + t.resolved.label + ".csv";
    out.files.push_back({file, metrics_csv(t.result.metrics)});
    json r = optimizer_summary(t.resolved);
    r["total_steps"] = t.result.total_steps;
    r["final"] = metrics_json(t.result.metrics.back());
    r["file"] = file;
    results.push_back(r);
  }
  out.report["results"] = {{"train_size", ds.train_idx.size()},
                           {"test_size", ds.test_idx.size()},
                           {"parameter_count", spec.parameter_count()},
                           {"optimizers", results}};
}

void run_hessian(const ExperimentConfig& cfg, RunOutput& out) {
  const Dataset ds = build_dataset(cfg);
  const MlpSpec spec = build_model_spec(cfg, ds);
  const auto trained = train_all(cfg, ds, spec);
  const Batch train = ds.train_batch();
  std::vector<HessianSummary> summaries(trained.size());
  parallel_for(trained.size(), [&](std::size_t i) {
    const GradFn grad = [&](const ParamVector& p) { return backward(Mlp(spec, p), train); };
    const auto& theta = trained[i].result.model.params();
    const auto seed = derive_seed(cfg.seed, "probe");
    const auto eig = top_eigenvalue(grad, theta, cfg.hessian.max_iters, cfg.hessian.tol, seed);
    const auto trace = hutchinson_trace(grad, theta, cfg.hessian.probes, seed);
    summaries[i] = summarize(eig, trace);
  });
  json results = json::array();
  for (std::size_t i = 0; i < trained.size(); ++i) {
    const auto& t = trained[i];
    const auto& h = summaries[i];
    const std::string file = "metrics_" + t.resolved.label + ".csv";
    out.files.push_back({file, metrics_csv(t.result.metrics)});
    json r = optimizer_summary(t.resolved);
    r["final"] = metrics_json(t.result.metrics.back());
    r["hessian"] = {{"top_eigenvalue", h.top_eigenvalue},
                    {"trace_estimate", h.trace_estimate},
                    {"trace_std_error", h.trace_std_error ? json(*h.trace_std_error) : json(nullptr)},
                    {"hvp_count", h.hvp_count},
                    {"probe_count", h.probe_count},
                    {"tolerance_reached", h.tolerance_reached}};
    r["file"] = file;
    results.push_back(r);
  }
  out.report["results"] = {{"parameter_count", spec.parameter_count()}, {"optimizers", results}};
}

void run_escape(const ExperimentConfig& cfg, RunOutput& out) {
  const auto mi = escape_time_miadam1(cfg.scenario);
  const auto adam = escape_time_adam(cfg.scenario);
  const double log_ratio = mi.log_value - adam.log_value;
  out.report["results"] = {{"phi_miadam1", escape_json(mi)},
                           {"phi_adam", escape_json(adam)},
                           {"ratio", num(std::exp(log_ratio))},
                           {"log_ratio", log_ratio}};
}

void run_regret(const ExperimentConfig& cfg, RunOutput& out) {
  const auto problem =
      DriftingQuadratic::generate(cfg.regret.dim, cfg.regret.amplitude, derive_seed(cfg.seed, "problem"));
  std::vector<RegretSeries> series(cfg.optimizers.size());
  parallel_for(series.size(), [&](std::size_t i) {
    series[i] = run_regret_experiment(problem, resolve_optimizer(cfg.optimizers[i]), cfg.regret.options);
  });
  json results = json::array();
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    CsvWriter csv{"t", "R_t", "R_t_over_t"};
    for (std::size_t k = 0; k < s.cumulative_regret.size(); ++k) {
      csv.cell(static_cast<std::int64_t>(k + 1)).cell(s.cumulative_regret[k]).cell(s.average_regret[k]);
      csv.end_row();
    }
    const std::string file = "regret_" + s.optimizer_label + ".csv";
    out.files.push_back({file, csv.str()});
    auto resolved = resolve_optimizer(cfg.optimizers[i]);
    if (auto* p = std::get_if<MIAdamHyperParams>(&resolved.params)) p->switch_step = kNeverSwitch;
    json r = optimizer_summary(resolved);
    r["final_regret"] = s.cumulative_regret.back();
    r["final_average_regret"] = s.average_regret.back();
    if (s.average_regret.size() >= 100) r["average_regret_at_100"] = s.average_regret[99];
    r["file"] = file;
    results.push_back(r);
  }
  out.report["results"] = {{"offline_minimizer", problem.offline_minimizer(cfg.regret.options.horizon)},
                           {"optimizers", results}};
}

json metadata(const ExperimentConfig& cfg) {
  json m{{"seeds",
          {{"dataset", derive_seed(cfg.seed, "dataset")},
           {"noise", derive_seed(cfg.seed, "noise")},
           {"init", derive_seed(cfg.seed, "init")},
           {"shuffle", derive_seed(cfg.seed, "shuffle")},
           {"probe", derive_seed(cfg.seed, "probe")},
           {"problem", derive_seed(cfg.seed, "problem")}}}};
  if (cfg.kind == ExperimentKind::trajectory || cfg.kind == ExperimentKind::grid_flatness) {
    m["convergence_radius_widths"] = kConvergenceRadiusWidths;
    m["flatness_measure"] = "sum of absolute Hessian eigenvalues";
  }
  if (cfg.kind == ExperimentKind::regret) {
    m["comparator"] = "offline minimizer over the full horizon (mean target)";
    m["miadam_switch"] = "disabled";
  }
  return m;
}

}  // namespace

std::vector<std::string> config_warnings(const ExperimentConfig& cfg) {
  std::vector<std::string> w;
  for (const auto& b : cfg.optimizers) {
    const auto* p = std::get_if<MIAdamHyperParams>(&b.config.params);
    if (!p) continue;
    const std::string who = "optimizer '" + b.config.label + "': ";
    if (b.pre_switch_mode == PreSwitchLr::alpha_pow_n && p->order_n > 1) {
      w.push_back(who + "pre-switch learning rate alpha^n is active (" + format_double(std::pow(p->adam.alpha, p->order_n)) + ")");
    } else if (b.pre_switch_mode == PreSwitchLr::gain_matched && p->order_n > 1) {
      w.push_back(who + "pre-switch learning rate overridden to alpha*(1-kappa)^(n-1)");
    } else if (b.pre_switch_mode == PreSwitchLr::fixed) {
      w.push_back(who + "pre-switch learning rate overridden to " + format_double(*p->pre_switch_lr_override));
    }
    if (p->order_untested()) w.push_back(who + "order_n > 3 is untested");
  }
  return w;
}

RunOutput execute(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOutput out;
  out.report = {{"artifact_version", kArtifactVersion},
                {"kind", to_string(cfg.kind)},
                {"config", to_json(cfg)},
                {"warnings", config_warnings(cfg)},
                {"metadata", metadata(cfg)}};
  switch (cfg.kind) {
    case ExperimentKind::trajectory: run_trajectory(cfg, out); break;
    case ExperimentKind::grid_flatness: run_grid(cfg, out); break;
    case ExperimentKind::train: run_train(cfg, out); break;
    case ExperimentKind::escape_theory: run_escape(cfg, out); break;
    case ExperimentKind::regret: run_regret(cfg, out); break;
    case ExperimentKind::hessian_report: run_hessian(cfg, out); break;
  }
  json files = json::array();
  for (const auto& f : out.files) files.push_back(f.name);
  out.report["files"] = files;
  out.report["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_outputs(const RunOutput& out, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  const bool created_dir = !fs::exists(dir);
  auto write_one = [&](const std::string& name, const std::string& contents) {
    const fs::path p = dir / name;
    std::ofstream os(p, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + p.string() + " for writing");
    written.push_back(p);
    os.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    os.close();
    if (!os) throw std::runtime_error("failed writing " + p.string());
  };
  try {
    fs::create_directories(dir);
    for (const auto& f : out.files) write_one(f.name, f.contents);
    write_one("report.json", out.report.dump(2) + "\n");
  } catch (...) {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
    if (created_dir) fs::remove(dir, ec);
    throw;
  }
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("", "cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  const std::string text = ss.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", path.string() + ": malformed JSON: " + e.what());
  }
  if (j.is_object() && j.contains("artifact_version") && j.contains("config")) return parse_config(j.at("config"));
  return parse_config(j);
}

}  // namespace flatmin
