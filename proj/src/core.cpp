#include "litlvm/core.hpp"

#include <algorithm>
#include <cmath>

#include "litlvm/errors.hpp"

namespace litlvm {

std::string_view to_string(TaskKind task) {
  switch (task) {
    case TaskKind::regression: return "regression";
    case TaskKind::classification: return "classification";
    case TaskKind::survival: return "survival";
  }
  return "unknown";
}

std::string_view to_string(LvmKind kind) {
  switch (kind) {
    case LvmKind::none: return "none";
    case LvmKind::low_rank: return "low_rank";
    case LvmKind::latent_distance: return "latent_distance";
  }
  return "unknown";
}

TaskKind parse_task(std::string_view name) {
  if (name == "regression") return TaskKind::regression;
  if (name == "classification") return TaskKind::classification;
  if (name == "survival") return TaskKind::survival;
  throw ArgumentError("unknown task '" + std::string(name) + "'");
}

LvmKind parse_lvm_kind(std::string_view name) {
  if (name == "none") return LvmKind::none;
  if (name == "low_rank") return LvmKind::low_rank;
  if (name == "latent_distance") return LvmKind::latent_distance;
  throw ArgumentError("unknown lvm kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- Dataset

void Dataset::validate() const {
  const auto rows = X.rows();
  if (!X.allFinite()) throw DataError("feature matrix contains non-finite values");
  if (!feature_names.empty() && feature_names.size() != p()) {
    throw DataError("feature_names has " + std::to_string(feature_names.size()) +
                    " entries for " + std::to_string(p()) + " features");
  }
  switch (task) {
    case TaskKind::regression:
      if (y.size() != rows) throw DataError("target length does not match row count");
      if (!y.allFinite()) throw DataError("target contains non-finite values");
      break;
    case TaskKind::classification:
      if (y.size() != rows) throw DataError("target length does not match row count");
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (y[i] != 0.0 && y[i] != 1.0) {
          throw DataError("classification label at row " + std::to_string(i) + " is not 0/1");
        }
      }
      break;
    case TaskKind::survival:
      if (time.size() != rows || event.size() != rows) {
        throw DataError("survival time/event length does not match row count");
      }
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (!(std::isfinite(time[i]) && time[i] > 0.0)) {
          throw DataError("survival time at row " + std::to_string(i) + " is not positive");
        }
        if (event[i] != 0.0 && event[i] != 1.0) {
          throw DataError("event indicator at row " + std::to_string(i) + " is not 0/1");
        }
      }
      break;
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.task = task;
  out.feature_names = feature_names;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  const bool has_y = y.size() > 0;
  const bool has_surv = time.size() > 0;
  if (has_y) out.y.resize(out.X.rows());
  if (has_surv) {
    out.time.resize(out.X.rows());
    out.event.resize(out.X.rows());
  }
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = static_cast<Eigen::Index>(rows[r]);
    const auto dst = static_cast<Eigen::Index>(r);
    if (src >= X.rows()) throw DimensionError("row index out of range in subset");
    out.X.row(dst) = X.row(src);
    if (has_y) out.y[dst] = y[src];
    if (has_surv) {
      out.time[dst] = time[src];
      out.event[dst] = event[src];
    }
  }
  return out;
}

std::size_t Dataset::event_count() const {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < event.size(); ++i) count += event[i] != 0.0;
  return count;
}

// ------------------------------------------------------ InteractionScheme

InteractionScheme::InteractionScheme(std::size_t p, std::vector<std::uint8_t> mask)
    : p_(p), mask_(std::move(mask)) {
  if (mask_.size() != pair_count(p)) {
    throw DimensionError("mask has " + std::to_string(mask_.size()) + " entries, expected " +
                         std::to_string(pair_count(p)));
  }
  flat_of_lex_.assign(mask_.size(), -1);
  std::size_t lex = 0;
  for (std::size_t j = 0; j + 1 < p; ++j) {
    for (std::size_t k = j + 1; k < p; ++k, ++lex) {
      if (mask_[lex] > 1) throw ArgumentError("mask entries must be 0 or 1");
      if (mask_[lex]) {
        flat_of_lex_[lex] = static_cast<std::int64_t>(active_.size());
        active_.push_back({j, k});
        lex_of_flat_.push_back(lex);
      }
    }
  }
}

InteractionScheme InteractionScheme::all_pairs(std::size_t p) {
  return InteractionScheme(p, std::vector<std::uint8_t>(pair_count(p), 1));
}

InteractionScheme InteractionScheme::no_pairs(std::size_t p) {
  return InteractionScheme(p, std::vector<std::uint8_t>(pair_count(p), 0));
}

InteractionScheme InteractionScheme::from_mask(std::size_t p, std::vector<std::uint8_t> mask) {
  return InteractionScheme(p, std::move(mask));
}

InteractionScheme InteractionScheme::from_pairs(std::size_t p, std::span<const FeaturePair> pairs) {
  std::vector<std::uint8_t> mask(pair_count(p), 0);
  for (const auto& [a, b] : pairs) {
    if (a == b) throw ArgumentError("self-interactions are not supported");
    mask[lex_index(p, std::min(a, b), std::max(a, b))] = 1;
  }
  return InteractionScheme(p, std::move(mask));
}

InteractionScheme InteractionScheme::bipartite(std::size_t p, std::span<const std::size_t> group_a,
                                               std::span<const std::size_t> group_b) {
  std::vector<std::uint8_t> mask(pair_count(p), 0);
  for (std::size_t a : group_a) {
    for (std::size_t b : group_b) {
      if (a == b) continue;
      mask[lex_index(p, std::min(a, b), std::max(a, b))] = 1;
    }
  }
  return InteractionScheme(p, std::move(mask));
}

std::size_t InteractionScheme::lex_index(std::size_t p, std::size_t j, std::size_t k) {
  if (!(j < k && k < p)) {
    throw DimensionError("pair (" + std::to_string(j) + "," + std::to_string(k) +
                         ") invalid for p=" + std::to_string(p));
  }
  // Pairs before row j: sum_{r<j} (p-1-r).
  return j * (2 * p - j - 1) / 2 + (k - j - 1);
}

std::optional<std::size_t> InteractionScheme::flat_index(std::size_t j, std::size_t k) const {
  if (j > k) std::swap(j, k);
  if (j == k || k >= p_) return std::nullopt;
  const auto flat = flat_of_lex_[lex_index(p_, j, k)];
  if (flat < 0) return std::nullopt;
  return static_cast<std::size_t>(flat);
}

// ------------------------------------------------------------ ModelParams

void ModelParams::validate(const InteractionScheme& scheme) const {
  if (p() != scheme.p()) {
    throw DimensionError("model has " + std::to_string(p()) + " features, scheme has " +
                         std::to_string(scheme.p()));
  }
  if (static_cast<std::size_t>(theta.size()) != scheme.size()) {
    throw DimensionError("theta has " + std::to_string(theta.size()) + " entries, scheme has " +
                         std::to_string(scheme.size()) + " active pairs");
  }
  if (lvm_kind != LvmKind::none) {
    if (static_cast<std::size_t>(Z.rows()) != p()) throw DimensionError("Z must have p rows");
    if (Z.cols() < 1 || static_cast<std::size_t>(Z.cols()) >= p()) {
      throw DimensionError("latent dimension must satisfy 1 <= d < p");
    }
  }
}

// ------------------------------------------------------------- operations

Vector expand_interactions(std::span<const double> x, const InteractionScheme& scheme) {
  if (x.size() != scheme.p()) {
    throw DimensionError("feature vector has length " + std::to_string(x.size()) +
                         ", scheme expects " + std::to_string(scheme.p()));
  }
  Vector out(static_cast<Eigen::Index>(scheme.size()));
  const auto& pairs = scheme.pairs();
  for (std::size_t f = 0; f < pairs.size(); ++f) {
    out[static_cast<Eigen::Index>(f)] = x[pairs[f].j] * x[pairs[f].k];
  }
  return out;
}

double linear_score(const ModelParams& params, std::span<const double> x,
                    const InteractionScheme& scheme) {
  params.validate(scheme);
  const Vector inter = expand_interactions(x, scheme);
  const Eigen::Map<const Vector> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  double score = params.has_intercept ? params.beta0 : 0.0;
  score += params.beta.dot(xv);
  if (inter.size() > 0) score += params.theta.dot(inter);
  if (!std::isfinite(score)) throw NumericError("linear score is not finite");
  return score;
}

Vector linear_scores(const ModelParams& params, const Matrix& X, const InteractionScheme& scheme) {
  params.validate(scheme);
  if (static_cast<std::size_t>(X.cols()) != scheme.p()) {
    throw DimensionError("design matrix column count does not match scheme");
  }
  Vector scores = X * params.beta;
  if (params.has_intercept) scores.array() += params.beta0;
  if (!scheme.empty()) {
    const Matrix S = symmetric_theta(params.theta, scheme);
    const Matrix XS = X * S;
    scores += 0.5 * XS.cwiseProduct(X).rowwise().sum();
  }
  if (!scores.allFinite()) throw NumericError("linear scores are not finite");
  return scores;
}

Vector reconstruct_theta(const Matrix& Z, double alpha0, LvmKind kind,
                         const InteractionScheme& scheme) {
  if (static_cast<std::size_t>(Z.rows()) != scheme.p()) {
    throw DimensionError("Z has " + std::to_string(Z.rows()) + " rows, scheme expects " +
                         std::to_string(scheme.p()));
  }
  if (Z.cols() < 1) throw DimensionError("latent dimension must be at least 1");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(scheme.size()));
  const auto& pairs = scheme.pairs();
  for (std::size_t f = 0; f < pairs.size(); ++f) {
    const auto zj = Z.row(static_cast<Eigen::Index>(pairs[f].j));
    const auto zk = Z.row(static_cast<Eigen::Index>(pairs[f].k));
    switch (kind) {
      case LvmKind::low_rank: out[static_cast<Eigen::Index>(f)] = zj.dot(zk); break;
      case LvmKind::latent_distance:
        out[static_cast<Eigen::Index>(f)] = alpha0 - (zj - zk).squaredNorm();
        break;
      case LvmKind::none: throw ArgumentError("reconstruct_theta requires an LVM kind");
    }
  }
  return out;
}

Vector flatten_theta(const Matrix& theta_upper, const InteractionScheme& scheme) {
  const auto p = static_cast<Eigen::Index>(scheme.p());
  if (theta_upper.rows() != p || theta_upper.cols() != p) {
    throw DimensionError("interaction matrix must be p x p");
  }
  Vector out(static_cast<Eigen::Index>(scheme.size()));
  const auto& pairs = scheme.pairs();
  for (std::size_t f = 0; f < pairs.size(); ++f) {
    out[static_cast<Eigen::Index>(f)] =
        theta_upper(static_cast<Eigen::Index>(pairs[f].j), static_cast<Eigen::Index>(pairs[f].k));
  }
  return out;
}

Matrix unflatten_theta(const Vector& theta_flat, const InteractionScheme& scheme) {
  if (static_cast<std::size_t>(theta_flat.size()) != scheme.size()) {
    throw DimensionError("flat theta has " + std::to_string(theta_flat.size()) +
                         " entries, scheme has " + std::to_string(scheme.size()));
  }
  const auto p = static_cast<Eigen::Index>(scheme.p());
  Matrix out = Matrix::Zero(p, p);
  const auto& pairs = scheme.pairs();
  for (std::size_t f = 0; f < pairs.size(); ++f) {
    out(static_cast<Eigen::Index>(pairs[f].j), static_cast<Eigen::Index>(pairs[f].k)) =
        theta_flat[static_cast<Eigen::Index>(f)];
  }
  return out;
}

Matrix symmetric_theta(const Vector& theta_flat, const InteractionScheme& scheme) {
  Matrix upper = unflatten_theta(theta_flat, scheme);
  Matrix sym = upper + upper.transpose();
  return sym;
}

Vector weighted_pair_moments(const Matrix& X, const Vector& g, const InteractionScheme& scheme) {
  if (X.rows() != g.size()) throw DimensionError("weight vector length does not match rows");
  Vector out(static_cast<Eigen::Index>(scheme.size()));
  if (scheme.empty()) return out;
  const Matrix weighted = X.array().colwise() * g.array();
  const Eigen::MatrixXd moments = weighted.transpose() * X;
  const auto& pairs = scheme.pairs();
  for (std::size_t f = 0; f < pairs.size(); ++f) {
    out[static_cast<Eigen::Index>(f)] =
        moments(static_cast<Eigen::Index>(pairs[f].j), static_cast<Eigen::Index>(pairs[f].k));
  }
  return out;
}

// ------------------------------------------------------------ Standardizer

Standardizer Standardizer::fit(const Matrix& X) {
  Standardizer s;
  const double n = static_cast<double>(X.rows());
  if (X.rows() < 2) throw DegenerateInputError("standardization needs at least two rows");
  s.mean = X.colwise().mean().transpose();
  s.scale.resize(X.cols());
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    const double var = (X.col(c).array() - s.mean[c]).square().sum() / (n - 1.0);
    // Constant columns are centred but left unscaled.
    s.scale[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return s;
}

Matrix Standardizer::apply(const Matrix& X) const {
  if (X.cols() != mean.size()) throw DimensionError("standardizer fitted on different width");
  Matrix out = X;
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    out.col(c) = (out.col(c).array() - mean[c]) / scale[c];
  }
  return out;
}

}  // namespace litlvm
