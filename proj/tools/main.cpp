#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "litlvm/app.hpp"
#include "litlvm/errors.hpp"

namespace {

void report_error(const std::exception& e) {
  const nlohmann::json err{{"error", {{"kind", litlvm::error_kind(e)}, {"message", e.what()}}}};
  std::cerr << err.dump() << '\n';
}

void print_written(const litlvm::Written& files) {
  for (const auto& f : files) std::cout << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear predictors with latent-structured pairwise interactions"};
  app.require_subcommand(1);
  app.fallthrough();

  litlvm::CliOptions opts;
  std::uint64_t seed = 0;
  std::string standardize;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for the optimizer and the simulator");
  app.add_option("--jobs", opts.jobs, "Worker threads for grid search and experiments")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", opts.out_dir, "Directory for output files");
  app.add_option("--standardize", standardize, "Standardize features (default: on for CSV data)")
      ->check(CLI::IsMember({"on", "off"}));

  std::string config;
  std::string model;
  std::string data;
  std::string metrics;
  litlvm::DatasetColumns targets;

  auto* simulate = app.add_subcommand("simulate", "Write a simulated dataset and its ground truth");
  auto* fit = app.add_subcommand("fit", "Fit one model from a config");
  auto* grid = app.add_subcommand("grid-search", "Cross-validated grid search, then refit");
  auto* experiment = app.add_subcommand("experiment", "Method x p x seed simulation sweep");
  for (auto* sub : {simulate, fit, grid, experiment}) {
    sub->add_option("--config", config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  }

  auto* predict = app.add_subcommand("predict", "Score a CSV with a saved model");
  auto* evaluate = app.add_subcommand("evaluate", "Held-out metrics for a saved model");
  auto* export_latent = app.add_subcommand("export-latent", "Latent coordinates and pair table");
  for (auto* sub : {predict, evaluate, export_latent}) {
    sub->add_option("--model", model, "Saved model (JSON)")->required()->check(CLI::ExistingFile);
  }
  for (auto* sub : {predict, evaluate}) {
    sub->add_option("--data", data, "Dataset (CSV)")->required()->check(CLI::ExistingFile);
  }
  evaluate->add_option("--metrics", metrics, "Comma-separated: rmse, auc, c_index, cox_pll, brier, ibs");
  evaluate->add_option("--target", targets.target, "Target column (regression/classification)");
  evaluate->add_option("--time", targets.time, "Time column (survival)");
  evaluate->add_option("--event", targets.event, "Event column (survival)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const litlvm::ConfigError err(e.what());
    report_error(err);
    return 2;
  }

  if (seed_opt->count() > 0) opts.seed = seed;
  if (!standardize.empty()) opts.standardize = standardize == "on";

  try {
    auto run_config = [&] {
      litlvm::RunConfig cfg = litlvm::load_run_config(config);
      litlvm::apply_overrides(cfg, opts);
      return cfg;
    };
    if (simulate->parsed()) {
      print_written(litlvm::cmd_simulate(run_config(), opts));
    } else if (fit->parsed()) {
      print_written(litlvm::cmd_fit(run_config(), opts));
    } else if (grid->parsed()) {
      print_written(litlvm::cmd_grid_search(run_config(), opts));
    } else if (experiment->parsed()) {
      print_written(litlvm::cmd_experiment(run_config(), opts));
    } else if (predict->parsed()) {
      print_written(litlvm::cmd_predict(model, data, opts));
    } else if (evaluate->parsed()) {
      std::vector<std::string> list;
      for (std::size_t start = 0; start < metrics.size();) {
        std::size_t end = metrics.find(',', start);
        if (end == std::string::npos) end = metrics.size();
        if (end > start) list.push_back(metrics.substr(start, end - start));
        start = end + 1;
      }
      print_written(litlvm::cmd_evaluate(model, data, list, targets, opts));
    } else if (export_latent->parsed()) {
      print_written(litlvm::cmd_export_latent(model, opts));
    }
  } catch (const std::exception& e) {
    report_error(e);
    return litlvm::exit_code_for(e);
  }
  return 0;
}
