#include <algorithm>
#include <atomic>
#include <functional>
#include <cmath>
#include <thread>

#include "json_util.hpp"
#include "litlvm/app.hpp"
#include "litlvm/errors.hpp"
#include "litlvm/predictors.hpp"

namespace litlvm {

using detail::json;

FitConfig method_config(FitMode method, const FitConfig& base) {
  FitConfig cfg = base;
  switch (method) {
    case FitMode::elastic_net:
      cfg.model = ModelKind::interactions;
      cfg.lvm_kind = LvmKind::none;
      cfg.penalty.lambda_l = 0.0;
      break;
    case FitMode::lit_lvm:
      if (base.lvm_kind == LvmKind::none) throw ConfigError("lit_lvm needs an LVM kind");
      cfg.model = ModelKind::interactions;
      break;
    case FitMode::fm:
      cfg.model = ModelKind::factorization_machine;
      cfg.lvm_kind = LvmKind::low_rank;
      cfg.penalty.lambda_l = 0.0;
      break;
  }
  return cfg;
}

FitMode mode_of(const FitConfig& cfg) {
  if (cfg.model == ModelKind::factorization_machine) return FitMode::fm;
  if (cfg.lvm_kind == LvmKind::none || cfg.penalty.lambda_l == 0.0) return FitMode::elastic_net;
  return FitMode::lit_lvm;
}

FitResult fit_pipeline(const Dataset& data, const InteractionScheme& scheme, const FitConfig& cfg) {
  const bool latent = cfg.model == ModelKind::factorization_machine || cfg.lvm_kind != LvmKind::none;
  if (cfg.task != TaskKind::survival || !latent || cfg.initial) return train(data, scheme, cfg);
  FitConfig en = method_config(FitMode::elastic_net, cfg);
  const FitResult warm = fit(data, scheme, en);
  FitConfig next = cfg;
  next.initial = warm.params;
  return train(data, scheme, next);
}

namespace {

std::vector<std::string> names_or_default(const Dataset& data) {
  if (!data.feature_names.empty()) return data.feature_names;
  std::vector<std::string> names;
  for (std::size_t j = 0; j < data.p(); ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

}  // namespace

FittedModel fit_model(const Dataset& train, const InteractionScheme& scheme, const FitConfig& cfg,
                      bool standardize, const std::string& config_hash) {
  Dataset data = train;
  std::optional<Standardizer> st;
  if (standardize) {
    st = Standardizer::fit(train.X);
    data.X = st->apply(train.X);
  }
  FitConfig c = cfg;
  if (mode_of(c) == FitMode::elastic_net) c = method_config(FitMode::elastic_net, c);
  FitResult r = fit_pipeline(data, scheme, c);

  FittedModel out;
  SavedModel& m = out.model;
  m.task = c.task;
  m.mode = mode_of(c);
  m.feature_names = names_or_default(train);
  m.scheme = scheme;
  m.params = std::move(r.params);
  m.standardization = std::move(st);
  m.seed = c.optimizer.seed;
  m.config_hash = config_hash;
  if (c.task == TaskKind::survival) {
    const Vector scores = linear_scores(m.params, data.X, scheme);
    m.baseline = breslow_baseline(scores, data.time, data.event);
    m.brier_grid = default_brier_grid(data.time, data.event);
  }
  out.report = std::move(r.report);
  return out;
}

Evaluation evaluate_model(const SavedModel& model, const Dataset& data,
                          std::vector<std::string> metrics) {
  if (data.task != model.task) throw ArgumentError("dataset task does not match the model");
  if (metrics.empty()) {
    switch (model.task) {
      case TaskKind::regression: metrics = {"rmse"}; break;
      case TaskKind::classification: metrics = {"auc"}; break;
      case TaskKind::survival: metrics = {"c_index", "ibs"}; break;
    }
  }
  const Vector scores = model.predict(data.X).score;
  auto need = [&](TaskKind task, const std::string& name) {
    if (model.task != task) {
      throw ArgumentError("metric '" + name + "' needs a " + std::string(to_string(task)) + " model");
    }
  };

  Evaluation eval;
  auto brier = [&] {
    if (eval.brier_grid.empty()) {
      eval.brier_grid = model.brier_grid;
      eval.brier_curve = brier_curve(model.survival(scores), data.time, data.event, eval.brier_grid);
    }
  };
  for (const auto& name : metrics) {
    double value = 0.0;
    if (name == "rmse") {
      need(TaskKind::regression, name);
      value = rmse(data.y, scores);
    } else if (name == "auc") {
      need(TaskKind::classification, name);
      value = auc(scores, data.y);
    } else if (name == "c_index") {
      need(TaskKind::survival, name);
      value = c_index(scores, data.time, data.event);
    } else if (name == "cox_pll") {
      need(TaskKind::survival, name);
      value = -cox_loss_grad(scores, data.time, data.event).value;
    } else if (name == "brier") {
      need(TaskKind::survival, name);
      brier();
      continue;
    } else if (name == "ibs") {
      need(TaskKind::survival, name);
      brier();
      value = integrated_brier(eval.brier_curve, eval.brier_grid);
    } else {
      throw ArgumentError("unknown metric '" + name + "'");
    }
    eval.reports.push_back(EvalReport::from_values(name, {value}));
  }
  return eval;
}

namespace {

json loss_json(const LossComponents& l) {
  return {{"pred", l.pred}, {"reg", l.reg}, {"lvm", l.lvm}, {"total", l.total}};
}

}  // namespace

std::string fit_report_json(const FitReport& report, const SavedModel& model) {
  json j;
  j["task"] = std::string(to_string(model.task));
  j["mode"] = std::string(to_string(model.mode));
  j["epochs"] = report.epochs;
  j["converged"] = report.converged;
  j["best_epoch"] = report.best_epoch;
  j["best"] = loss_json(report.best);
  json traj = json::array();
  for (const auto& l : report.trajectory) traj.push_back(loss_json(l));
  j["trajectory"] = std::move(traj);
  j["config_hash"] = model.config_hash;
  return j.dump(2) + "\n";
}

std::string evaluation_json(const Evaluation& eval, const SavedModel& model, std::size_t n) {
  json j;
  j["task"] = std::string(to_string(model.task));
  j["mode"] = std::string(to_string(model.mode));
  j["n"] = n;
  json metrics = json::object();
  for (const auto& r : eval.reports) {
    metrics[r.metric] = {{"values", r.values}, {"mean", r.mean}, {"std_error", r.std_error}};
  }
  j["metrics"] = std::move(metrics);
  if (!eval.brier_grid.empty()) {
    j["brier_curve"] = {{"grid", eval.brier_grid}, {"values", eval.brier_curve}};
  }
  return j.dump(2) + "\n";
}

std::string ground_truth_json(const GroundTruth& truth, const SimulationSpec& spec) {
  const SimConfig& c = spec.config;
  json j;
  j["generator"] = spec.generator == Generator::linear ? "linear" : "logistic";
  j["n"] = c.n;
  j["p"] = c.p;
  j["d_true"] = c.d_true;
  j["sigma_eps2"] = c.sigma_eps2;
  j["sigma_s2"] = c.sigma_s2;
  j["sigma_theta2"] = c.sigma_theta2;
  j["sigma_y2"] = c.sigma_y2;
  j["lvm_kind"] = std::string(to_string(c.lvm_kind));
  j["noise"] = c.noise == NoisePlacement::inside_link ? "inside_link" : "outside_link";
  j["seed"] = c.seed;
  j["beta"] = detail::to_json(truth.beta);
  j["theta"] = detail::to_json(truth.theta);
  j["Z"] = detail::to_json(truth.Z);
  j["alpha0"] = truth.alpha0;
  j["beta_dense"] = detail::to_json(truth.beta_dense);
  j["theta_dense"] = detail::to_json(truth.theta_dense);
  return j.dump(2) + "\n";
}

namespace {

std::pair<Dataset, GroundTruth> simulate(const SimulationSpec& spec) {
  return spec.generator == Generator::linear ? gen_linear(spec.config) : gen_logistic(spec.config);
}

const SimulationSpec& need_simulation(const RunConfig& cfg) {
  if (!cfg.simulation) throw ConfigError("config needs a 'simulation' block");
  return *cfg.simulation;
}

Dataset load_config_data(const RunConfig& cfg) {
  if (cfg.data_path.empty()) throw ConfigError("config needs data.path");
  return load_dataset(cfg.data_path, cfg.columns);
}

GridSpec grid_for(const RunConfig& cfg, const FitConfig& tmpl) {
  GridSpec spec = cfg.grid;
  if (tmpl.model == ModelKind::factorization_machine && !cfg.grid_d_given) {
    spec.d_grid = GridSpec::fm_defaults().d_grid;
  }
  return spec;
}

// Grid search on `train` (standardized the same way as the final fit).
GridResult tune(const Dataset& train, const InteractionScheme& scheme, const GridSpec& spec,
                const FitConfig& tmpl, bool standardize, std::size_t jobs) {
  Dataset data = train;
  if (standardize) data.X = Standardizer::fit(train.X).apply(train.X);
  return grid_search(data, scheme, spec, tmpl, jobs, fit_pipeline);
}

CsvWriter cv_table(const GridResult& result, std::size_t folds) {
  std::vector<std::string> header{"lambda1", "lambda2", "lambda_l", "learning_rate", "latent_dim"};
  for (std::size_t f = 0; f < folds; ++f) header.push_back("fold_" + std::to_string(f + 1));
  for (const char* h : {"mean", "selected", "failed", "error"}) header.push_back(h);
  CsvWriter w(std::move(header));
  for (std::size_t c = 0; c < result.table.size(); ++c) {
    const CvRow& row = result.table[c];
    std::vector<std::string> cells{format_double(row.cell.lambda1), format_double(row.cell.lambda2),
                                   format_double(row.cell.lambda_l),
                                   format_double(row.cell.learning_rate),
                                   std::to_string(row.cell.latent_dim)};
    for (std::size_t f = 0; f < folds; ++f) {
      cells.push_back(!row.failed && f < row.fold_scores.size() ? format_double(row.fold_scores[f]) : "");
    }
    cells.push_back(row.failed ? "" : format_double(row.mean));
    cells.push_back(c == result.best_index ? "1" : "0");
    cells.push_back(row.failed ? "1" : "0");
    cells.push_back(row.error);
    w.add_row(std::move(cells));
  }
  return w;
}

void run_parallel(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
}

}  // namespace

Written cmd_simulate(const RunConfig& cfg, const CliOptions& opts) {
  const SimulationSpec& spec = need_simulation(cfg);
  const auto [data, truth] = simulate(spec);
  Written out{opts.out_dir / "dataset.csv", opts.out_dir / "ground_truth.json"};
  save_dataset(out[0], data, cfg.columns);
  write_text(out[1], ground_truth_json(truth, spec));
  if (spec.split_fraction) {
    const Split s = split(data, *spec.split_fraction, spec.config.seed);
    out.push_back(opts.out_dir / "train.csv");
    out.push_back(opts.out_dir / "test.csv");
    save_dataset(out[2], s.train, cfg.columns);
    save_dataset(out[3], s.test, cfg.columns);
  }
  return out;
}

Written cmd_fit(const RunConfig& cfg, const CliOptions& opts) {
  const Dataset data = load_config_data(cfg);
  const InteractionScheme scheme = cfg.mask.resolve(data.feature_names);
  const FitConfig fit_cfg = method_config(cfg.method, cfg.fit);
  const FittedModel fitted = fit_model(data, scheme, fit_cfg, cfg.standardize.value_or(true), cfg.hash);
  Written out{opts.out_dir / "model.json", opts.out_dir / "fit_report.json"};
  fitted.model.save(out[0]);
  write_text(out[1], fit_report_json(fitted.report, fitted.model));
  return out;
}

Written cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                    const CliOptions& opts) {
  const SavedModel model = SavedModel::load(model_path);
  const Matrix X = select_columns(read_csv(data_path), model.feature_names);
  const Predictions pred = model.predict(X);

  std::vector<std::string> header{"score"};
  switch (model.task) {
    case TaskKind::regression: header.push_back("prediction"); break;
    case TaskKind::classification: header.push_back("probability"); break;
    case TaskKind::survival: header.push_back("risk"); break;
  }
  Matrix surv;
  if (model.task == TaskKind::survival) {
    surv = model.survival(pred.score);
    for (double t : model.brier_grid) header.push_back("surv_" + format_double(t));
  }
  CsvWriter w(std::move(header));
  std::vector<double> row;
  for (Eigen::Index i = 0; i < pred.score.size(); ++i) {
    row = {pred.score[i], pred.response[i]};
    for (Eigen::Index c = 0; c < surv.cols(); ++c) row.push_back(surv(i, c));
    w.add_row(std::span<const double>(row));
  }
  Written out{opts.out_dir / "predictions.csv"};
  w.save(out[0]);
  return out;
}

Written cmd_evaluate(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                     const std::vector<std::string>& metrics, const DatasetColumns& targets,
                     const CliOptions& opts) {
  const SavedModel model = SavedModel::load(model_path);
  DatasetColumns cols = targets;
  cols.task = model.task;
  cols.features = model.feature_names;
  const Dataset data = load_dataset(data_path, cols);
  const Evaluation eval = evaluate_model(model, data, metrics);
  Written out{opts.out_dir / "eval_report.json"};
  write_text(out[0], evaluation_json(eval, model, data.n()));
  return out;
}

Written cmd_grid_search(const RunConfig& cfg, const CliOptions& opts) {
  const Dataset data = load_config_data(cfg);
  const InteractionScheme scheme = cfg.mask.resolve(data.feature_names);
  const FitConfig tmpl = method_config(cfg.method, cfg.fit);
  const GridSpec spec = grid_for(cfg, tmpl);
  const bool standardize = cfg.standardize.value_or(true);
  const GridResult result = tune(data, scheme, spec, tmpl, standardize, opts.jobs);
  const FittedModel fitted = fit_model(data, scheme, result.best, standardize, cfg.hash);

  Written out{opts.out_dir / "model.json", opts.out_dir / "cv_table.csv",
              opts.out_dir / "fit_report.json"};
  fitted.model.save(out[0]);
  cv_table(result, spec.folds).save(out[1]);
  write_text(out[2], fit_report_json(fitted.report, fitted.model));
  return out;
}

Written cmd_export_latent(const std::filesystem::path& model_path, const CliOptions& opts) {
  const SavedModel model = SavedModel::load(model_path);
  const ModelParams& params = model.params;
  if (params.lvm_kind == LvmKind::none || params.Z.size() == 0) {
    throw StateError("model has no latent block to export");
  }
  const auto p = static_cast<Eigen::Index>(model.feature_names.size());
  const Eigen::Index d = params.Z.cols();

  std::vector<std::string> header{"feature"};
  for (Eigen::Index k = 0; k < d; ++k) header.push_back("z_" + std::to_string(k + 1));
  CsvWriter coords(header);
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<std::string> cells{model.feature_names[static_cast<std::size_t>(j)]};
    for (Eigen::Index k = 0; k < d; ++k) cells.push_back(format_double(params.Z(j, k)));
    coords.add_row(std::move(cells));
  }

  // Every pair, regardless of the mask: distances for latent_distance,
  // inner products (zero diagonal) for low_rank.
  const bool distance = params.lvm_kind == LvmKind::latent_distance;
  std::vector<std::string> pair_header{"feature"};
  pair_header.insert(pair_header.end(), model.feature_names.begin(), model.feature_names.end());
  CsvWriter pairwise(std::move(pair_header));
  for (Eigen::Index j = 0; j < p; ++j) {
    std::vector<std::string> cells{model.feature_names[static_cast<std::size_t>(j)]};
    for (Eigen::Index k = 0; k < p; ++k) {
      double v = 0.0;
      if (j != k) {
        v = distance ? (params.Z.row(j) - params.Z.row(k)).norm() : params.Z.row(j).dot(params.Z.row(k));
      }
      cells.push_back(format_double(v));
    }
    pairwise.add_row(std::move(cells));
  }
  Written out{opts.out_dir / "latent_coordinates.csv",
              opts.out_dir / (distance ? "latent_distances.csv" : "latent_dot_products.csv")};
  coords.save(out[0]);
  pairwise.save(out[1]);
  return out;
}

Written cmd_experiment(const RunConfig& cfg, const CliOptions& opts) {
  const SimulationSpec& sim = need_simulation(cfg);
  if (!cfg.experiment) throw ConfigError("config needs an 'experiment' block");
  const ExperimentSpec& e = *cfg.experiment;
  const bool standardize = cfg.standardize.value_or(false);

  struct Run {
    FitMode method;
    std::size_t p;
    std::uint64_t seed;
    std::optional<FittedModel> fitted;
    FitConfig chosen;
    double value = 0.0;
    std::string metric;
    std::string error;
    std::string kind;
  };
  std::vector<Run> runs;
  for (FitMode m : e.methods)
    for (std::size_t p : e.p_values)
      for (std::uint64_t seed : e.seeds) runs.push_back({m, p, seed, std::nullopt, {}, 0.0, {}, {}, {}});

  run_parallel(runs.size(), opts.jobs, [&](std::size_t i) {
    Run& run = runs[i];
    try {
      SimulationSpec spec = sim;
      spec.config.p = run.p;
      spec.config.seed = run.seed;
      const auto [data, truth] = simulate(spec);
      const Split s = split(data, e.split_fraction, run.seed);
      const InteractionScheme scheme = cfg.mask.resolve(data.feature_names);
      FitConfig fc = method_config(run.method, cfg.fit);
      fc.optimizer.seed = run.seed;
      if (e.tune) fc = tune(s.train, scheme, grid_for(cfg, fc), fc, standardize, 1).best;
      run.chosen = fc;
      run.fitted = fit_model(s.train, scheme, fc, standardize, cfg.hash);
      const Evaluation eval = evaluate_model(run.fitted->model, s.test, {});
      run.metric = eval.reports.front().metric;
      run.value = eval.reports.front().mean;
    } catch (const std::exception& ex) {
      run.error = ex.what();
      run.kind = error_kind(ex);
      run.fitted.reset();
    }
  });

  CsvWriter results({"method", "p", "seed", "metric", "value", "lambda1", "lambda2", "lambda_l",
                     "learning_rate", "latent_dim", "epochs"});
  json failures = json::array();
  for (const Run& run : runs) {
    if (!run.fitted) {
      failures.push_back({{"method", std::string(to_string(run.method))},
                          {"p", run.p},
                          {"seed", run.seed},
                          {"kind", run.kind},
                          {"message", run.error}});
      continue;
    }
    const FitConfig& c = run.chosen;
    const bool latent = c.model == ModelKind::factorization_machine || c.lvm_kind != LvmKind::none;
    results.add_row({std::string(to_string(run.method)), std::to_string(run.p), std::to_string(run.seed),
                     run.metric, format_double(run.value), format_double(c.penalty.lambda1),
                     format_double(c.penalty.lambda2), format_double(c.penalty.lambda_l),
                     format_double(c.optimizer.learning_rate),
                     latent ? std::to_string(c.latent_dim) : "",
                     std::to_string(run.fitted->report.epochs)});
  }
  Written out{opts.out_dir / "results.csv", opts.out_dir / "failures.json"};
  results.save(out[0]);
  json manifest{{"runs", runs.size()}, {"failed", failures.size()}, {"failures", failures}};
  write_text(out[1], manifest.dump(2) + "\n");
  if (failures.size() == runs.size()) {
    throw SearchFailedError("every experiment run failed", {});
  }
  return out;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ArgumentError*>(&e) ||
      dynamic_cast<const StateError*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DegenerateInputError*>(&e) ||
      dynamic_cast<const DimensionError*>(&e)) {
    return 3;
  }
  if (dynamic_cast<const DivergenceError*>(&e) || dynamic_cast<const NumericError*>(&e)) return 4;
  return 1;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return "config";
  if (dynamic_cast<const ArgumentError*>(&e)) return "argument";
  if (dynamic_cast<const StateError*>(&e)) return "state";
  if (dynamic_cast<const DataError*>(&e)) return "data";
  if (dynamic_cast<const DegenerateInputError*>(&e)) return "degenerate_input";
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension";
  if (dynamic_cast<const DivergenceError*>(&e)) return "divergence";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric";
  if (dynamic_cast<const SearchFailedError*>(&e)) return "search_failed";
  return "internal";
}

}  // namespace litlvm
