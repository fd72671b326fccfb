#include "litlvm/predictors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "litlvm/errors.hpp"

namespace litlvm {

namespace {

void require_same_length(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) throw DimensionError(std::string(what) + ": length mismatch");
  if (a.size() == 0) throw ArgumentError(std::string(what) + ": empty input");
}

// log(1 + e^s) without overflow.
double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

// Rows grouped by tied time, groups in increasing time order.
struct TimeGroups {
  std::vector<std::size_t> order;  // row indices sorted by time
  std::vector<std::size_t> start;  // group boundaries into order, with sentinel
};

TimeGroups group_by_time(const Vector& times) {
  TimeGroups g;
  g.order.resize(static_cast<std::size_t>(times.size()));
  std::iota(g.order.begin(), g.order.end(), std::size_t{0});
  std::stable_sort(g.order.begin(), g.order.end(), [&](std::size_t a, std::size_t b) {
    return times[static_cast<Eigen::Index>(a)] < times[static_cast<Eigen::Index>(b)];
  });
  for (std::size_t i = 0; i < g.order.size(); ++i) {
    if (i == 0 || times[static_cast<Eigen::Index>(g.order[i])] !=
                      times[static_cast<Eigen::Index>(g.order[i - 1])]) {
      g.start.push_back(i);
    }
  }
  g.start.push_back(g.order.size());
  return g;
}

void check_survival_inputs(const Vector& scores, const Vector& times, const Vector& events) {
  require_same_length(scores, times, "cox");
  if (events.size() != times.size()) throw DimensionError("cox: events length mismatch");
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw ArgumentError("survival times must be positive");
    if (events[i] != 0.0 && events[i] != 1.0) throw ArgumentError("events must be 0 or 1");
  }
}

}  // namespace

double logistic(double s) {
  if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
  const double e = std::exp(s);
  return e / (1.0 + e);
}

LossEval mse_loss_grad(const Vector& scores, const Vector& y) {
  require_same_length(scores, y, "mse");
  const double n = static_cast<double>(y.size());
  const Vector r = scores - y;
  return {r.squaredNorm() / n, (2.0 / n) * r};
}

LossEval logistic_loss_grad(const Vector& scores, const Vector& y) {
  require_same_length(scores, y, "logistic");
  const double n = static_cast<double>(y.size());
  LossEval out;
  out.grad.resize(y.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) throw ArgumentError("logistic labels must be 0 or 1");
    const double s = scores[i];
    // softplus(s) - y s == softplus(-s) when y == 1; keeps precision in saturation
    total += y[i] == 1.0 ? softplus(-s) : softplus(s);
    out.grad[i] = (logistic(s) - y[i]) / n;
  }
  out.value = total / n;
  return out;
}

LossEval cox_loss_grad(const Vector& scores, const Vector& times, const Vector& events) {
  check_survival_inputs(scores, times, events);
  const double num_events = events.sum();
  if (num_events == 0.0) throw DegenerateInputError("cox partial likelihood needs at least one event");

  const double shift = scores.maxCoeff();
  const Vector w = (scores.array() - shift).exp();
  const TimeGroups groups = group_by_time(times);
  const std::size_t num_groups = groups.start.size() - 1;

  // Risk-set sums per group, accumulated from the latest time backwards.
  std::vector<double> risk(num_groups);
  std::vector<double> deaths(num_groups, 0.0);
  double running = 0.0;
  double value = 0.0;
  for (std::size_t g = num_groups; g-- > 0;) {
    for (std::size_t r = groups.start[g]; r < groups.start[g + 1]; ++r) {
      const auto i = static_cast<Eigen::Index>(groups.order[r]);
      running += w[i];
      if (events[i] == 1.0) {
        deaths[g] += 1.0;
        value += scores[i];
      }
    }
    risk[g] = running;
    if (deaths[g] > 0.0) value -= deaths[g] * (shift + std::log(running));
  }

  LossEval out;
  out.value = -value / num_events;
  out.grad.resize(scores.size());
  double hazard = 0.0;
  for (std::size_t g = 0; g < num_groups; ++g) {
    if (deaths[g] > 0.0) hazard += deaths[g] / risk[g];
    for (std::size_t r = groups.start[g]; r < groups.start[g + 1]; ++r) {
      const auto i = static_cast<Eigen::Index>(groups.order[r]);
      out.grad[i] = -(events[i] - w[i] * hazard) / num_events;
    }
  }
  if (!std::isfinite(out.value)) throw NumericError("cox partial likelihood is not finite");
  return out;
}

LossEval prediction_loss(TaskKind task, const Vector& scores, const Dataset& data) {
  switch (task) {
    case TaskKind::regression: return mse_loss_grad(scores, data.y);
    case TaskKind::classification: return logistic_loss_grad(scores, data.y);
    case TaskKind::survival: return cox_loss_grad(scores, data.time, data.event);
  }
  throw ArgumentError("unknown task");
}

double BaselineHazard::at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0.0;
  return cumhaz[static_cast<std::size_t>(it - times.begin()) - 1];
}

BaselineHazard breslow_baseline(const Vector& scores, const Vector& times, const Vector& events) {
  check_survival_inputs(scores, times, events);
  if (events.sum() == 0.0) throw DegenerateInputError("baseline hazard needs at least one event");
  const TimeGroups groups = group_by_time(times);
  const std::size_t num_groups = groups.start.size() - 1;

  std::vector<double> risk(num_groups);
  std::vector<double> deaths(num_groups, 0.0);
  double running = 0.0;
  for (std::size_t g = num_groups; g-- > 0;) {
    for (std::size_t r = groups.start[g]; r < groups.start[g + 1]; ++r) {
      const auto i = static_cast<Eigen::Index>(groups.order[r]);
      running += std::exp(scores[i]);
      deaths[g] += events[i];
    }
    risk[g] = running;
  }

  BaselineHazard h;
  double cum = 0.0;
  for (std::size_t g = 0; g < num_groups; ++g) {
    if (deaths[g] == 0.0) continue;
    cum += deaths[g] / risk[g];
    h.times.push_back(times[static_cast<Eigen::Index>(groups.order[groups.start[g]])]);
    h.cumhaz.push_back(cum);
  }
  return h;
}

Predictions predict(const ModelParams& params, const Matrix& X, const InteractionScheme& scheme,
                    TaskKind task) {
  Predictions out;
  out.score = linear_scores(params, X, scheme);
  switch (task) {
    case TaskKind::regression: out.response = out.score; break;
    case TaskKind::classification:
      // Kept strictly inside (0,1) even when the logistic saturates in double.
      out.response = out.score.unaryExpr([](double s) {
        return std::clamp(logistic(s), std::numeric_limits<double>::min(),
                          std::nextafter(1.0, 0.0));
      });
      break;
    case TaskKind::survival: out.response = out.score.array().exp(); break;
  }
  return out;
}

Matrix survival_curves(const Vector& scores, const std::optional<BaselineHazard>& baseline,
                       std::span<const double> grid) {
  if (!baseline) throw StateError("survival curves need a fitted baseline hazard");
  Matrix S(scores.size(), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const double h0 = baseline->at(grid[c]);
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
      S(i, static_cast<Eigen::Index>(c)) = std::exp(-h0 * std::exp(scores[i]));
    }
  }
  return S;
}

}  // namespace litlvm
