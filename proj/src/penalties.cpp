#include "litlvm/penalties.hpp"

#include <cmath>

#include "litlvm/errors.hpp"

namespace litlvm {

void PenaltyConfig::validate() const {
  for (double w : {lambda1, lambda2, lambda_l}) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ArgumentError("penalty weights must be finite and non-negative");
    }
  }
}

ElasticNetEval elastic_net_value_grad(const Vector& beta_aug, const PenaltyConfig& cfg,
                                      bool has_intercept) {
  cfg.validate();
  const Eigen::Index skip = (has_intercept && cfg.exclude_intercepts) ? 1 : 0;
  ElasticNetEval out;
  out.smooth_grad = Vector::Zero(beta_aug.size());
  if (beta_aug.size() <= skip) return out;
  const auto tail = beta_aug.tail(beta_aug.size() - skip);
  out.value = cfg.lambda2 * tail.squaredNorm() + cfg.lambda1 * tail.lpNorm<1>();
  out.smooth_grad.tail(tail.size()) = 2.0 * cfg.lambda2 * tail;
  return out;
}

void soft_threshold_inplace(Eigen::Ref<Vector> v, double threshold) {
  if (!(threshold >= 0.0)) throw ArgumentError("soft-threshold level must be non-negative");
  if (threshold == 0.0) return;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - threshold;
    v[i] = a > 0.0 ? std::copysign(a, v[i]) : 0.0;
  }
}

Vector soft_threshold(const Vector& v, double threshold) {
  Vector out = v;
  soft_threshold_inplace(out, threshold);
  return out;
}

LvmResidual lvm_residual(const Vector& theta, const Matrix& Z, double alpha0, LvmKind kind,
                         const InteractionScheme& scheme) {
  if (static_cast<std::size_t>(theta.size()) != scheme.size()) {
    throw DimensionError("theta length does not match the active pair count");
  }
  return {theta - reconstruct_theta(Z, alpha0, kind, scheme)};
}

double lvm_value(const Vector& theta, const Matrix& Z, double alpha0, LvmKind kind,
                 const InteractionScheme& scheme, double lambda_l) {
  if (kind == LvmKind::none || lambda_l == 0.0) return 0.0;
  return lambda_l * lvm_residual(theta, Z, alpha0, kind, scheme).residual.squaredNorm();
}

LvmGrads lvm_grads(const Vector& theta, const Matrix& Z, double alpha0, LvmKind kind,
                   const InteractionScheme& scheme, double lambda_l) {
  LvmGrads g;
  g.theta = Vector::Zero(theta.size());
  g.Z = Matrix::Zero(Z.rows(), Z.cols());
  if (kind == LvmKind::none || lambda_l == 0.0) return g;

  const Vector eps = lvm_residual(theta, Z, alpha0, kind, scheme).residual;
  g.theta = 2.0 * lambda_l * eps;

  const auto& pairs = scheme.pairs();
  for (std::size_t f = 0; f < pairs.size(); ++f) {
    const auto j = static_cast<Eigen::Index>(pairs[f].j);
    const auto k = static_cast<Eigen::Index>(pairs[f].k);
    const double e = eps[static_cast<Eigen::Index>(f)];
    if (kind == LvmKind::low_rank) {
      // d/dz_j of (theta - z_j.z_k)^2 = -2 e z_k
      g.Z.row(j) -= 2.0 * lambda_l * e * Z.row(k);
      g.Z.row(k) -= 2.0 * lambda_l * e * Z.row(j);
    } else {
      // d/dz_j of (theta - a0 + |z_j - z_k|^2)^2 = 4 e (z_j - z_k)
      const auto diff = (Z.row(j) - Z.row(k)).eval();
      g.Z.row(j) += 4.0 * lambda_l * e * diff;
      g.Z.row(k) -= 4.0 * lambda_l * e * diff;
      g.alpha0 -= 2.0 * lambda_l * e;
    }
  }
  return g;
}

}  // namespace litlvm
