#include "litlvm/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>
#include <tuple>

#include "litlvm/errors.hpp"
#include "litlvm/metrics.hpp"
#include "litlvm/predictors.hpp"
#include "litlvm/rng.hpp"

namespace litlvm {

SelectionMetric default_metric(TaskKind task) {
  switch (task) {
    case TaskKind::regression: return SelectionMetric::rmse;
    case TaskKind::classification: return SelectionMetric::auc;
    case TaskKind::survival: return SelectionMetric::cox_pll;
  }
  return SelectionMetric::rmse;
}

bool higher_is_better(SelectionMetric metric) { return metric != SelectionMetric::rmse; }

std::string_view to_string(SelectionMetric metric) {
  switch (metric) {
    case SelectionMetric::rmse: return "rmse";
    case SelectionMetric::auc: return "auc";
    case SelectionMetric::cox_pll: return "cox_pll";
    case SelectionMetric::c_index: return "c_index";
  }
  return "unknown";
}

SelectionMetric parse_selection_metric(std::string_view name) {
  if (name == "rmse") return SelectionMetric::rmse;
  if (name == "auc") return SelectionMetric::auc;
  if (name == "cox_pll") return SelectionMetric::cox_pll;
  if (name == "c_index") return SelectionMetric::c_index;
  throw ArgumentError("unknown selection metric '" + std::string(name) + "'");
}

double score_model(SelectionMetric metric, const ModelParams& params, const Dataset& data,
                   const InteractionScheme& scheme) {
  const Vector scores = linear_scores(params, data.X, scheme);
  switch (metric) {
    case SelectionMetric::rmse: return rmse(data.y, scores);
    case SelectionMetric::auc: return auc(scores, data.y);
    // Mean partial log-likelihood per event.
    case SelectionMetric::cox_pll: return -cox_loss_grad(scores, data.time, data.event).value;
    case SelectionMetric::c_index: return c_index(scores, data.time, data.event);
  }
  throw ArgumentError("unknown selection metric");
}

void GridSpec::validate() const {
  if (lambda_l_grid.empty() || lambda1_grid.empty() || lambda2_grid.empty() || lr_grid.empty() ||
      d_grid.empty()) {
    throw ArgumentError("grids must be non-empty");
  }
  if (folds < 2) throw ArgumentError("cross-validation needs at least two folds");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw ArgumentError("split_fraction must lie in (0,1)");
  }
}

GridSpec GridSpec::fm_defaults() {
  GridSpec spec;
  spec.d_grid = {2, 10, 25, 50};
  return spec;
}

namespace {

// Fisher-Yates driven by the counter stream; `tag` separates strata.
void shuffle(std::vector<std::size_t>& rows, const rng::Stream& stream, std::uint32_t tag) {
  for (std::size_t i = rows.size(); i > 1; --i) {
    const double u = stream.uniform(tag, i);
    const auto j = std::min(static_cast<std::size_t>(u * static_cast<double>(i)), i - 1);
    std::swap(rows[i - 1], rows[j]);
  }
}

}  // namespace

Split split(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ArgumentError("split fraction must lie in (0,1)");
  const rng::Stream stream(seed, rng::Domain::split);

  std::vector<std::vector<std::size_t>> strata(1);
  if (data.task == TaskKind::survival) {
    strata.assign(2, {});
    for (std::size_t i = 0; i < data.n(); ++i) {
      strata[data.event[static_cast<Eigen::Index>(i)] == 1.0 ? 1 : 0].push_back(i);
    }
  } else {
    strata[0].resize(data.n());
    std::iota(strata[0].begin(), strata[0].end(), std::size_t{0});
  }

  Split out;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    auto& rows = strata[s];
    shuffle(rows, stream, static_cast<std::uint32_t>(s));
    const auto take = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(rows.size())));
    out.train_rows.insert(out.train_rows.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(take));
    out.test_rows.insert(out.test_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(take), rows.end());
  }
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());
  if (out.train_rows.empty() || out.test_rows.empty()) {
    throw DegenerateInputError("split left one side without rows");
  }
  out.train = data.subset(out.train_rows);
  out.test = data.subset(out.test_rows);
  if (data.task == TaskKind::survival &&
      (out.train.event_count() == 0 || out.test.event_count() == 0)) {
    throw DegenerateInputError("split left one side without observed events");
  }
  return out;
}

std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ArgumentError("kfold needs k >= 2");
  if (k > n) throw ArgumentError("kfold needs k <= n");
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  shuffle(rows, rng::Stream(seed, rng::Domain::folds), 0);

  std::vector<Fold> folds(k);
  std::size_t at = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].validate.assign(rows.begin() + static_cast<std::ptrdiff_t>(at),
                             rows.begin() + static_cast<std::ptrdiff_t>(at + size));
    std::sort(folds[f].validate.begin(), folds[f].validate.end());
    at += size;
  }
  for (std::size_t f = 0; f < k; ++f) {
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) folds[f].fit.insert(folds[f].fit.end(), folds[g].validate.begin(), folds[g].validate.end());
    }
    std::sort(folds[f].fit.begin(), folds[f].fit.end());
  }
  return folds;
}

std::vector<GridCell> expand_grid(const GridSpec& spec, const FitConfig& tmpl) {
  spec.validate();
  const bool fm = tmpl.model == ModelKind::factorization_machine;
  const bool lvm = !fm && tmpl.lvm_kind != LvmKind::none;
  const std::vector<double> lambda_l = lvm ? spec.lambda_l_grid : std::vector<double>{0.0};
  const std::vector<std::size_t> dims =
      (lvm || fm) ? spec.d_grid : std::vector<std::size_t>{tmpl.latent_dim};

  std::vector<GridCell> cells;
  for (double l1 : spec.lambda1_grid)
    for (double l2 : spec.lambda2_grid)
      for (double ll : lambda_l)
        for (double lr : spec.lr_grid)
          for (std::size_t d : dims) cells.push_back({l1, l2, ll, lr, d});
  return cells;
}

FitConfig apply_cell(const FitConfig& tmpl, const GridCell& cell) {
  FitConfig cfg = tmpl;
  cfg.penalty.lambda1 = cell.lambda1;
  cfg.penalty.lambda2 = cell.lambda2;
  cfg.penalty.lambda_l = cell.lambda_l;
  cfg.optimizer.learning_rate = cell.learning_rate;
  cfg.latent_dim = cell.latent_dim;
  return cfg;
}

GridResult grid_search(const Dataset& train, const InteractionScheme& scheme,
                       const GridSpec& spec, const FitConfig& tmpl, std::size_t jobs,
                       const FitFunction& fitter) {
  const std::vector<GridCell> cells = expand_grid(spec, tmpl);
  const SelectionMetric metric = spec.metric.value_or(default_metric(tmpl.task));
  const std::vector<Fold> folds = kfold(train.n(), spec.folds, tmpl.optimizer.seed);

  std::vector<Dataset> fit_sets;
  std::vector<Dataset> val_sets;
  for (const auto& f : folds) {
    fit_sets.push_back(train.subset(f.fit));
    val_sets.push_back(train.subset(f.validate));
  }

  GridResult result;
  result.metric = metric;
  result.table.resize(cells.size());

  auto run_cell = [&](std::size_t c) {
    CvRow& row = result.table[c];
    row.cell = cells[c];
    const FitConfig cfg = apply_cell(tmpl, cells[c]);
    try {
      for (std::size_t f = 0; f < folds.size(); ++f) {
        const FitResult fitted =
            fitter ? fitter(fit_sets[f], scheme, cfg) : litlvm::train(fit_sets[f], scheme, cfg);
        const double s = score_model(metric, fitted.params, val_sets[f], scheme);
        if (!std::isfinite(s)) throw NumericError("validation score is not finite");
        row.fold_scores.push_back(s);
      }
      row.mean = std::accumulate(row.fold_scores.begin(), row.fold_scores.end(), 0.0) /
                 static_cast<double>(row.fold_scores.size());
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(cells.size(), 1));
  if (workers == 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) run_cell(c);
      });
    }
  }

  // Reduction in cell order. Key: better score, then stronger regularisation.
  auto key = [&](const CvRow& r) {
    const double s = higher_is_better(metric) ? r.mean : -r.mean;
    return std::make_tuple(s, r.cell.lambda1, r.cell.lambda2, r.cell.lambda_l,
                           -r.cell.learning_rate, -static_cast<double>(r.cell.latent_dim));
  };
  std::optional<std::size_t> best;
  std::vector<std::string> diagnostics;
  for (std::size_t c = 0; c < result.table.size(); ++c) {
    const CvRow& row = result.table[c];
    if (row.failed) {
      diagnostics.push_back("cell " + std::to_string(c) + ": " + row.error);
      continue;
    }
    if (!best || key(row) > key(result.table[*best])) best = c;
  }
  if (!best) throw SearchFailedError("every grid cell failed", std::move(diagnostics));
  result.best_index = *best;
  result.best = apply_cell(tmpl, cells[*best]);
  return result;
}

std::vector<SweepPoint> lambda_l_sweep(const Dataset& train, const Dataset& test,
                                       const InteractionScheme& scheme,
                                       const std::vector<double>& lambda_l_values,
                                       const FitConfig& fixed,
                                       std::optional<SelectionMetric> metric) {
  if (fixed.lvm_kind == LvmKind::none) throw ArgumentError("lambda_l sweep needs an LVM kind");
  const SelectionMetric m = metric.value_or(default_metric(fixed.task));
  std::vector<SweepPoint> curve;
  for (double value : lambda_l_values) {
    FitConfig cfg = fixed;
    cfg.penalty.lambda_l = value;
    const FitResult fitted = fit(train, scheme, cfg);
    curve.push_back({value, score_model(m, fitted.params, test, scheme)});
  }
  return curve;
}

}  // namespace litlvm
