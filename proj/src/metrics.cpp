#include "litlvm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "litlvm/errors.hpp"

namespace litlvm {

double rmse(const Vector& y, const Vector& yhat) {
  if (y.size() != yhat.size()) throw DimensionError("rmse: length mismatch");
  if (y.size() == 0) throw ArgumentError("rmse: empty input");
  return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

namespace {

// Midranks (1-based) of the values.
std::vector<double> midranks(const Vector& v) {
  const auto n = static_cast<std::size_t>(v.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return v[static_cast<Eigen::Index>(a)] < v[static_cast<Eigen::Index>(b)];
  });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[static_cast<Eigen::Index>(order[j + 1])] ==
                            v[static_cast<Eigen::Index>(order[i])]) {
      ++j;
    }
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t r = i; r <= j; ++r) ranks[order[r]] = mid;
    i = j + 1;
  }
  return ranks;
}

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void add(std::size_t i) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // Count of inserted entries with index < i.
  std::size_t prefix(std::size_t i) const {
    std::size_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::size_t> tree_;
};

}  // namespace

double auc(const Vector& scores, const Vector& labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: length mismatch");
  double n_pos = 0.0;
  double n_neg = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1.0) n_pos += 1.0;
    else if (labels[i] == 0.0) n_neg += 1.0;
    else throw ArgumentError("auc: labels must be 0 or 1");
  }
  if (n_pos == 0.0 || n_neg == 0.0) throw DegenerateInputError("auc needs both classes present");
  const std::vector<double> ranks = midranks(scores);
  double rank_sum = 0.0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1.0) rank_sum += ranks[static_cast<std::size_t>(i)];
  }
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double c_index(const Vector& risk, const Vector& times, const Vector& events) {
  if (risk.size() != times.size() || events.size() != times.size()) {
    throw DimensionError("c_index: length mismatch");
  }
  const auto n = static_cast<std::size_t>(risk.size());

  // Dense ranks of the risk scores for the Fenwick tree.
  std::vector<double> sorted(risk.data(), risk.data() + n);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  auto rank_of = [&](Eigen::Index i) {
    return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), risk[i]) -
                                    sorted.begin());
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times[static_cast<Eigen::Index>(a)] > times[static_cast<Eigen::Index>(b)];
  });

  // Walk from the latest time down; the tree holds subjects with strictly
  // later times than the current group.
  Fenwick later(sorted.size());
  std::size_t inserted = 0;
  double concordant = 0.0;
  double comparable = 0.0;
  for (std::size_t g = 0; g < n;) {
    std::size_t end = g;
    const double t = times[static_cast<Eigen::Index>(order[g])];
    while (end < n && times[static_cast<Eigen::Index>(order[end])] == t) ++end;
    for (std::size_t r = g; r < end; ++r) {
      const auto i = static_cast<Eigen::Index>(order[r]);
      if (events[i] != 1.0) continue;
      const std::size_t rk = rank_of(i);
      const double below = static_cast<double>(later.prefix(rk));
      const double tied = static_cast<double>(later.prefix(rk + 1)) - below;
      concordant += below + 0.5 * tied;
      comparable += static_cast<double>(inserted);
    }
    for (std::size_t r = g; r < end; ++r) {
      later.add(rank_of(static_cast<Eigen::Index>(order[r])));
      ++inserted;
    }
    g = end;
  }
  if (comparable == 0.0) throw DegenerateInputError("c_index: no comparable pairs");
  return concordant / comparable;
}

CensoringKm CensoringKm::fit(const Vector& times, const Vector& events) {
  if (times.size() != events.size()) throw DimensionError("censoring KM: length mismatch");
  const auto n = static_cast<std::size_t>(times.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return times[static_cast<Eigen::Index>(a)] < times[static_cast<Eigen::Index>(b)];
  });
  CensoringKm km;
  double surv = 1.0;
  std::size_t at_risk = n;
  for (std::size_t g = 0; g < n;) {
    std::size_t end = g;
    const double t = times[static_cast<Eigen::Index>(order[g])];
    std::size_t censored = 0;
    while (end < n && times[static_cast<Eigen::Index>(order[end])] == t) {
      censored += events[static_cast<Eigen::Index>(order[end])] == 0.0;
      ++end;
    }
    if (censored > 0) {
      surv *= 1.0 - static_cast<double>(censored) / static_cast<double>(at_risk);
      km.times.push_back(t);
      km.surv.push_back(surv);
    }
    at_risk -= end - g;
    g = end;
  }
  return km;
}

double CensoringKm::at(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  return it == times.begin() ? 1.0 : surv[static_cast<std::size_t>(it - times.begin()) - 1];
}

double CensoringKm::left_limit(double t) const {
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  return it == times.begin() ? 1.0 : surv[static_cast<std::size_t>(it - times.begin()) - 1];
}

std::vector<double> brier_curve(const Matrix& surv_probs, const Vector& times,
                                const Vector& events, std::span<const double> grid) {
  const Eigen::Index n = times.size();
  if (surv_probs.rows() != n || events.size() != n) throw DimensionError("brier: row mismatch");
  if (surv_probs.cols() != static_cast<Eigen::Index>(grid.size())) {
    throw DimensionError("brier: one column per grid time expected");
  }
  if (n == 0) throw ArgumentError("brier: empty input");
  const CensoringKm G = CensoringKm::fit(times, events);

  std::vector<double> curve(grid.size());
  std::vector<std::size_t> undefined;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const double t = grid[c];
    const auto col = static_cast<Eigen::Index>(c);
    const double g_t = G.at(t);
    double sum = 0.0;
    bool ok = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double s = surv_probs(i, col);
      if (times[i] <= t && events[i] == 1.0) {
        const double w = G.left_limit(times[i]);
        if (w <= 0.0) { ok = false; break; }
        sum += s * s / w;
      } else if (times[i] > t) {
        if (g_t <= 0.0) { ok = false; break; }
        sum += (1.0 - s) * (1.0 - s) / g_t;
      }
    }
    if (!ok) undefined.push_back(c);
    curve[c] = sum / static_cast<double>(n);
  }
  if (!undefined.empty()) {
    std::string list;
    for (std::size_t c : undefined) list += (list.empty() ? "" : ",") + std::to_string(c);
    throw NumericError("brier: censoring survivor estimate is zero at grid points [" + list + "]");
  }
  return curve;
}

double integrated_brier(std::span<const double> curve, std::span<const double> grid) {
  if (curve.size() != grid.size()) throw DimensionError("integrated_brier: length mismatch");
  if (grid.size() < 2) throw ArgumentError("integrated_brier needs at least two grid points");
  const double span = grid.back() - grid.front();
  if (!(span > 0.0)) throw ArgumentError("integrated_brier: grid must be increasing");
  double area = 0.0;
  for (std::size_t c = 1; c < grid.size(); ++c) {
    const double dt = grid[c] - grid[c - 1];
    if (dt < 0.0) throw ArgumentError("integrated_brier: grid must be increasing");
    area += 0.5 * (curve[c] + curve[c - 1]) * dt;
  }
  return area / span;
}

std::vector<double> default_brier_grid(const Vector& times, const Vector& events,
                                       std::size_t points) {
  if (points < 2) throw ArgumentError("brier grid needs at least two points");
  std::vector<double> observed;
  for (Eigen::Index i = 0; i < times.size(); ++i) {
    if (events[i] == 1.0) observed.push_back(times[i]);
  }
  if (observed.empty()) throw DegenerateInputError("brier grid needs observed events");
  std::sort(observed.begin(), observed.end());
  // Quantile levels 0.1 .. 0.9, linear interpolation between order statistics.
  std::vector<double> grid(points);
  const double last = static_cast<double>(observed.size() - 1);
  for (std::size_t c = 0; c < points; ++c) {
    const double level = 0.1 + 0.8 * static_cast<double>(c) / static_cast<double>(points - 1);
    const double pos = level * last;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, observed.size() - 1);
    grid[c] = observed[lo] + (pos - static_cast<double>(lo)) * (observed[hi] - observed[lo]);
  }
  return grid;
}

PcaEmbedding pca_embed_baseline(const Vector& theta_flat, const InteractionScheme& scheme,
                                std::size_t d) {
  if (d < 1 || d > scheme.p()) throw ArgumentError("pca embedding needs 1 <= d <= p");
  const Eigen::MatrixXd sym = symmetric_theta(theta_flat, scheme);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericError("eigendecomposition failed");
  const Vector& values = eig.eigenvalues();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });

  PcaEmbedding out;
  const auto p = static_cast<Eigen::Index>(scheme.p());
  const auto dd = static_cast<Eigen::Index>(d);
  out.Z.resize(p, dd);
  out.signs.resize(dd);
  Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index c = 0; c < dd; ++c) {
    const Eigen::Index e = order[static_cast<std::size_t>(c)];
    const Eigen::VectorXd v = eig.eigenvectors().col(e);
    out.Z.col(c) = v * std::sqrt(std::abs(values[e]));
    out.signs[c] = values[e] < 0.0 ? -1.0 : 1.0;
    rebuilt.noalias() += values[e] * v * v.transpose();
  }
  out.theta = flatten_theta(rebuilt, scheme);
  return out;
}

EvalReport EvalReport::from_values(std::string metric, std::vector<double> values) {
  EvalReport r;
  r.metric = std::move(metric);
  r.values = std::move(values);
  if (r.values.empty()) return r;
  const double k = static_cast<double>(r.values.size());
  r.mean = std::accumulate(r.values.begin(), r.values.end(), 0.0) / k;
  const bool constant = std::all_of(r.values.begin(), r.values.end(),
                                    [&](double v) { return v == r.values.front(); });
  if (constant) {
    r.mean = r.values.front();
  } else {
    double ss = 0.0;
    for (double v : r.values) ss += (v - r.mean) * (v - r.mean);
    r.std_error = std::sqrt(ss / (k - 1.0)) / std::sqrt(k);
  }
  return r;
}

}  // namespace litlvm
