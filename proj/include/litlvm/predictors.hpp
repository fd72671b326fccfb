#pragma once

#include <optional>
#include <span>
#include <vector>

#include "litlvm/core.hpp"

namespace litlvm {

struct LossEval {
  double value = 0.0;
  Vector grad;  // with respect to the scores
};

// (1/n) sum (y - s)^2
LossEval mse_loss_grad(const Vector& scores, const Vector& y);

// (1/n) sum log(1 + e^s) - y s, evaluated without overflow.
LossEval logistic_loss_grad(const Vector& scores, const Vector& y);

// Breslow negative log partial likelihood, averaged over events.
// Risk set at t_i is {j : t_j >= t_i}.
LossEval cox_loss_grad(const Vector& scores, const Vector& times, const Vector& events);

LossEval prediction_loss(TaskKind task, const Vector& scores, const Dataset& data);

// Cumulative baseline hazard as a right-continuous step function.
struct BaselineHazard {
  std::vector<double> times;   // distinct event times, increasing
  std::vector<double> cumhaz;  // H0 just after each time

  double at(double t) const;
};

BaselineHazard breslow_baseline(const Vector& scores, const Vector& times, const Vector& events);

double logistic(double s);

struct Predictions {
  Vector score;
  // regression: score; classification: P(y=1); survival: exp(score)
  Vector response;
};

Predictions predict(const ModelParams& params, const Matrix& X, const InteractionScheme& scheme,
                    TaskKind task);

// S(t|x) = exp(-H0(t) e^score); one row per subject, one column per grid time.
Matrix survival_curves(const Vector& scores, const std::optional<BaselineHazard>& baseline,
                       std::span<const double> grid);

}  // namespace litlvm
