#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "litlvm/core.hpp"
#include "litlvm/trainer.hpp"

namespace litlvm {

enum class SelectionMetric { rmse, auc, cox_pll, c_index };

SelectionMetric default_metric(TaskKind task);
bool higher_is_better(SelectionMetric metric);
std::string_view to_string(SelectionMetric metric);
SelectionMetric parse_selection_metric(std::string_view name);

// Held-out score of fitted params on `data`.
double score_model(SelectionMetric metric, const ModelParams& params, const Dataset& data,
                   const InteractionScheme& scheme);

struct GridSpec {
  std::vector<double> lambda_l_grid{0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> lambda1_grid{0.0, 0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> lambda2_grid{0.0, 0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<double> lr_grid{0.005, 0.01, 0.05, 0.1};
  std::vector<std::size_t> d_grid{2};
  std::size_t folds = 5;
  double split_fraction = 0.5;
  std::optional<SelectionMetric> metric;

  void validate() const;
  // FM default: d in {2, 10, 25, 50}.
  static GridSpec fm_defaults();
};

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// Seeded row partition; survival data is stratified on the event indicator.
Split split(const Dataset& data, double fraction, std::uint64_t seed);

struct Fold {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> validate;
};

std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed);

struct GridCell {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda_l = 0.0;
  double learning_rate = 0.01;
  std::size_t latent_dim = 2;
};

struct CvRow {
  GridCell cell;
  std::vector<double> fold_scores;
  double mean = 0.0;
  bool failed = false;
  std::string error;
};

struct GridResult {
  FitConfig best;
  std::size_t best_index = 0;
  SelectionMetric metric = SelectionMetric::rmse;
  std::vector<CvRow> table;
};

// Cartesian product of the grids that apply to the template's model kind:
// lambda_l only for interactions with an LVM, d only for LVM/FM models.
std::vector<GridCell> expand_grid(const GridSpec& spec, const FitConfig& tmpl);

FitConfig apply_cell(const FitConfig& tmpl, const GridCell& cell);

using FitFunction =
    std::function<FitResult(const Dataset&, const InteractionScheme&, const FitConfig&)>;

// Exhaustive k-fold CV over the grid. Cells run on `jobs` threads and are
// reduced in cell order. Ties on the mean score go to larger
// (lambda1, lambda2, lambda_l), then smaller learning rate, then smaller d.
// `fitter` defaults to train().
GridResult grid_search(const Dataset& train, const InteractionScheme& scheme,
                       const GridSpec& spec, const FitConfig& tmpl, std::size_t jobs = 1,
                       const FitFunction& fitter = {});

struct SweepPoint {
  double lambda_l = 0.0;
  double metric = 0.0;
};

// One fit per lambda_l (same seed and initialisation), scored on `test`.
std::vector<SweepPoint> lambda_l_sweep(const Dataset& train, const Dataset& test,
                                       const InteractionScheme& scheme,
                                       const std::vector<double>& lambda_l_values,
                                       const FitConfig& fixed,
                                       std::optional<SelectionMetric> metric = std::nullopt);

}  // namespace litlvm
