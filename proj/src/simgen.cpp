#include "litlvm/simgen.hpp"

#include <algorithm>
#include <cmath>

#include "litlvm/errors.hpp"
#include "litlvm/predictors.hpp"

namespace litlvm {

void SimConfig::validate() const {
  if (n < 1) throw ArgumentError("simulation needs n >= 1");
  if (p < 2) throw ArgumentError("simulation needs p >= 2");
  if (d_true < 1 || d_true >= p) throw ArgumentError("simulation needs 1 <= d_true < p");
  for (double v : {sigma_eps2, sigma_s2, sigma_theta2, sigma_y2}) {
    if (!std::isfinite(v) || v < 0.0) throw ArgumentError("simulation variances must be >= 0");
  }
  if (lvm_kind == LvmKind::none) throw ArgumentError("simulation needs a latent model kind");
}

Matrix draw_features(std::size_t n, std::size_t p, std::uint64_t seed) {
  const rng::Stream stream(seed, rng::Domain::features);
  Matrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          stream.normal(static_cast<std::uint32_t>(i), j);
    }
  }
  return X;
}

namespace {

Vector draw_normal_vector(std::size_t size, std::uint64_t seed, rng::Domain domain) {
  const rng::Stream stream(seed, domain);
  Vector v(static_cast<Eigen::Index>(size));
  for (std::size_t j = 0; j < size; ++j) v[static_cast<Eigen::Index>(j)] = stream.normal(0, j);
  return v;
}

Matrix draw_latent(std::size_t p, std::size_t d, std::uint64_t seed) {
  const rng::Stream stream(seed, rng::Domain::true_latent);
  Matrix Z(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t c = 0; c < d; ++c) {
      Z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) =
          stream.normal(static_cast<std::uint32_t>(j), c);
    }
  }
  return Z;
}

// Latent reconstruction over all pairs plus N(0, variance) deviations.
Vector noisy_theta(const Matrix& Z, double alpha0, LvmKind kind, const InteractionScheme& full,
                   double variance, std::uint64_t seed) {
  Vector theta = reconstruct_theta(Z, alpha0, kind, full);
  if (variance > 0.0) {
    theta += std::sqrt(variance) * draw_normal_vector(full.size(), seed, rng::Domain::theta_noise);
  }
  return theta;
}

// Row-by-row so that each response depends only on its own row, whatever n is.
Vector noise_free_scores(const Matrix& X, const Vector& beta, const Vector& theta,
                         const InteractionScheme& full) {
  Vector scores(X.rows());
  const auto& pairs = full.pairs();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const auto x = X.row(i);
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) s += x[j] * beta[j];
    for (std::size_t f = 0; f < pairs.size(); ++f) {
      s += theta[static_cast<Eigen::Index>(f)] * x[static_cast<Eigen::Index>(pairs[f].j)] *
           x[static_cast<Eigen::Index>(pairs[f].k)];
    }
    scores[i] = s;
  }
  return scores;
}

std::vector<std::string> default_names(std::size_t p) {
  std::vector<std::string> names;
  names.reserve(p);
  for (std::size_t j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

}  // namespace

std::pair<Dataset, GroundTruth> gen_linear(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.lvm_kind != LvmKind::low_rank) throw ArgumentError("linear generator uses a low-rank model");
  const auto full = InteractionScheme::all_pairs(cfg.p);

  GroundTruth truth;
  truth.beta = draw_normal_vector(cfg.p, cfg.seed, rng::Domain::true_beta);
  truth.Z = draw_latent(cfg.p, cfg.d_true, cfg.seed);
  truth.theta = noisy_theta(truth.Z, 0.0, LvmKind::low_rank, full, cfg.sigma_eps2, cfg.seed);
  truth.beta_dense = truth.beta;
  truth.theta_dense = truth.theta;

  Dataset data;
  data.task = TaskKind::regression;
  data.X = draw_features(cfg.n, cfg.p, cfg.seed);
  data.feature_names = default_names(cfg.p);
  data.y = noise_free_scores(data.X, truth.beta, truth.theta, full);
  if (cfg.sigma_y2 > 0.0) {
    const rng::Stream noise(cfg.seed, rng::Domain::response_noise);
    const double sd = std::sqrt(cfg.sigma_y2);
    for (std::size_t i = 0; i < cfg.n; ++i) {
      data.y[static_cast<Eigen::Index>(i)] += sd * noise.normal(static_cast<std::uint32_t>(i), 0);
    }
  }
  return {std::move(data), std::move(truth)};
}

Vector sparsify(const Vector& dense, double sigma_s2, const rng::Stream& stream,
                std::uint64_t index_offset) {
  if (!(sigma_s2 >= 0.0)) throw ArgumentError("sparsification scale must be non-negative");
  Vector out = dense;
  for (Eigen::Index j = 0; j < dense.size(); ++j) {
    const double b = dense[j];
    // sigma_s2 == 0: only exact zeros are "zeroed", everything else survives.
    const double p_zero = sigma_s2 == 0.0 ? (b == 0.0 ? 1.0 : 0.0) : std::exp(-b * b / sigma_s2);
    if (stream.uniform(0, index_offset + static_cast<std::uint64_t>(j)) < p_zero) out[j] = 0.0;
  }
  return out;
}

std::pair<Dataset, GroundTruth> gen_logistic(const SimConfig& cfg,
                                             const std::optional<GroundTruth>& override_truth) {
  cfg.validate();
  const auto full = InteractionScheme::all_pairs(cfg.p);

  GroundTruth truth;
  if (override_truth) {
    truth = *override_truth;
    if (static_cast<std::size_t>(truth.beta.size()) != cfg.p ||
        static_cast<std::size_t>(truth.theta.size()) != full.size()) {
      throw DimensionError("ground-truth override does not match the configured p");
    }
  } else {
    truth.beta_dense = draw_normal_vector(cfg.p, cfg.seed, rng::Domain::true_beta);
    truth.Z = draw_latent(cfg.p, cfg.d_true, cfg.seed);
    truth.alpha0 = cfg.lvm_kind == LvmKind::latent_distance
                       ? rng::Stream(cfg.seed, rng::Domain::true_alpha).normal(0, 0)
                       : 0.0;
    truth.theta_dense =
        noisy_theta(truth.Z, truth.alpha0, cfg.lvm_kind, full, cfg.sigma_theta2, cfg.seed);
    const rng::Stream zeroing(cfg.seed, rng::Domain::sparsify);
    truth.beta = sparsify(truth.beta_dense, cfg.sigma_s2, zeroing, 0);
    truth.theta = sparsify(truth.theta_dense, cfg.sigma_s2, zeroing, cfg.p);
  }

  Dataset data;
  data.task = TaskKind::classification;
  data.X = draw_features(cfg.n, cfg.p, cfg.seed);
  data.feature_names = default_names(cfg.p);
  const Vector scores = noise_free_scores(data.X, truth.beta, truth.theta, full);

  const rng::Stream noise(cfg.seed, rng::Domain::response_noise);
  const rng::Stream coin(cfg.seed, rng::Domain::labels);
  const double sd = std::sqrt(cfg.sigma_y2);
  data.y.resize(static_cast<Eigen::Index>(cfg.n));
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const auto row = static_cast<std::uint32_t>(i);
    const double eta = sd > 0.0 ? sd * noise.normal(row, 0) : 0.0;
    const double s = scores[static_cast<Eigen::Index>(i)];
    const double prob = cfg.noise == NoisePlacement::inside_link
                            ? logistic(s + eta)
                            : std::clamp(logistic(s) + eta, 0.0, 1.0);
    data.y[static_cast<Eigen::Index>(i)] = coin.uniform(row, 0) < prob ? 1.0 : 0.0;
  }
  return {std::move(data), std::move(truth)};
}

}  // namespace litlvm
