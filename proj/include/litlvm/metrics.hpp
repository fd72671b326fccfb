#pragma once

#include <span>
#include <string>
#include <vector>

#include "litlvm/core.hpp"

namespace litlvm {

double rmse(const Vector& y, const Vector& yhat);

// Mann-Whitney statistic; tied scores count 1/2.
double auc(const Vector& scores, const Vector& labels);

// Harrell's C. A pair is comparable when the earlier time is an observed
// event; concordant when the earlier failure has the higher risk.
double c_index(const Vector& risk, const Vector& times, const Vector& events);

// Kaplan-Meier estimate of the censoring survivor function G.
struct CensoringKm {
  std::vector<double> times;  // distinct censoring times, increasing
  std::vector<double> surv;   // G just after each time

  static CensoringKm fit(const Vector& times, const Vector& events);
  double at(double t) const;            // G(t)
  double left_limit(double t) const;    // G(t-)
};

// IPCW Brier score at each grid time (Graf et al. construction).
// surv_probs(i, c) = predicted S(grid[c] | x_i).
std::vector<double> brier_curve(const Matrix& surv_probs, const Vector& times,
                                const Vector& events, std::span<const double> grid);

// Trapezoidal integral over the grid divided by its span.
double integrated_brier(std::span<const double> curve, std::span<const double> grid);

// Quantile-spaced grid over the observed event times.
std::vector<double> default_brier_grid(const Vector& times, const Vector& events,
                                       std::size_t points = 30);

struct PcaEmbedding {
  Matrix Z;             // p x d, eigenvectors scaled by sqrt|eigenvalue|
  Vector signs;         // sign of each retained eigenvalue
  Vector theta;         // rank-d reconstruction on the scheme's active pairs
};

// Symmetrise theta (zero diagonal), keep the d eigencomponents with the
// largest |eigenvalue| and rebuild the interaction weights from them.
PcaEmbedding pca_embed_baseline(const Vector& theta_flat, const InteractionScheme& scheme,
                                std::size_t d);

struct EvalReport {
  std::string metric;
  std::vector<double> values;
  double mean = 0.0;
  double std_error = 0.0;  // sample sd / sqrt(count); 0 for a single value

  static EvalReport from_values(std::string metric, std::vector<double> values);
};

}  // namespace litlvm
