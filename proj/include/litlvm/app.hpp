#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "litlvm/core.hpp"
#include "litlvm/csv.hpp"
#include "litlvm/metrics.hpp"
#include "litlvm/model_io.hpp"
#include "litlvm/simgen.hpp"
#include "litlvm/trainer.hpp"
#include "litlvm/tuner.hpp"

namespace litlvm {

// Which feature pairs get an interaction coefficient. Pairs and groups are
// given by feature name.
struct MaskSpec {
  enum class Kind { all, none, pairs, bipartite };
  Kind kind = Kind::all;
  std::vector<std::pair<std::string, std::string>> pairs;
  std::vector<std::string> group_a;
  std::vector<std::string> group_b;

  InteractionScheme resolve(const std::vector<std::string>& feature_names) const;
};

enum class Generator { linear, logistic };

struct SimulationSpec {
  Generator generator = Generator::linear;
  SimConfig config;
  // When set, cmd_simulate also writes the train/test halves.
  std::optional<double> split_fraction;
};

struct ExperimentSpec {
  std::vector<FitMode> methods{FitMode::elastic_net, FitMode::lit_lvm};
  std::vector<std::size_t> p_values;
  std::vector<std::uint64_t> seeds;
  double split_fraction = 0.5;
  bool tune = false;  // grid search on the training half before the final fit
};

struct RunConfig {
  FitMode method = FitMode::lit_lvm;
  FitConfig fit;  // task, LVM kind, d, penalty, optimizer
  GridSpec grid;
  bool grid_d_given = false;  // FM falls back to its own d grid otherwise
  MaskSpec mask;
  std::filesystem::path data_path;
  DatasetColumns columns;
  std::optional<bool> standardize;  // unset: on for CSV data, off for simulated data
  std::optional<SimulationSpec> simulation;
  std::optional<ExperimentSpec> experiment;
  std::string hash;  // of the canonical JSON form
};

// Unknown keys and ill-typed values raise ConfigError. Relative paths are
// resolved against `base_dir`.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

struct CliOptions {
  std::optional<std::uint64_t> seed;  // replaces optimizer and simulation seeds
  std::size_t jobs = 1;
  std::filesystem::path out_dir = ".";
  std::optional<bool> standardize;
};

void apply_overrides(RunConfig& cfg, const CliOptions& opts);

// Effective trainer settings for a method. A lit_lvm request with
// lambda_l = 0 is an elastic-net fit.
FitConfig method_config(FitMode method, const FitConfig& base);
FitMode mode_of(const FitConfig& cfg);

// Survival latent-penalty and FM fits start from an elastic-net fit with the same
// lambda1/lambda2 unless cfg.initial is already set.
FitResult fit_pipeline(const Dataset& data, const InteractionScheme& scheme, const FitConfig& cfg);

// Fits on `train` and packages the result. Standardization statistics come
// from `train` when `standardize` is set.
struct FittedModel {
  SavedModel model;
  FitReport report;
};
FittedModel fit_model(const Dataset& train, const InteractionScheme& scheme, const FitConfig& cfg,
                      bool standardize, const std::string& config_hash = {});

// Metrics of a saved model on a labelled dataset. Names: rmse, auc,
// c_index, cox_pll, brier, ibs. An empty list picks the task default.
struct Evaluation {
  std::vector<EvalReport> reports;
  std::vector<double> brier_grid;
  std::vector<double> brier_curve;
};
Evaluation evaluate_model(const SavedModel& model, const Dataset& data,
                          std::vector<std::string> metrics);

std::string fit_report_json(const FitReport& report, const SavedModel& model);
std::string evaluation_json(const Evaluation& eval, const SavedModel& model, std::size_t n);
std::string ground_truth_json(const GroundTruth& truth, const SimulationSpec& spec);

// Commands write into opts.out_dir and return the paths they wrote.
using Written = std::vector<std::filesystem::path>;

Written cmd_simulate(const RunConfig& cfg, const CliOptions& opts);
Written cmd_fit(const RunConfig& cfg, const CliOptions& opts);
Written cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                    const CliOptions& opts);
Written cmd_evaluate(const std::filesystem::path& model_path, const std::filesystem::path& data_path,
                     const std::vector<std::string>& metrics, const DatasetColumns& targets,
                     const CliOptions& opts);
Written cmd_grid_search(const RunConfig& cfg, const CliOptions& opts);
Written cmd_export_latent(const std::filesystem::path& model_path, const CliOptions& opts);
Written cmd_experiment(const RunConfig& cfg, const CliOptions& opts);

// 2 config, 3 data, 4 numeric divergence, 1 anything else.
int exit_code_for(const std::exception& e);
std::string error_kind(const std::exception& e);

}  // namespace litlvm
