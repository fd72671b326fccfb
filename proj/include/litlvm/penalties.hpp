#pragma once

#include "litlvm/core.hpp"

namespace litlvm {

struct PenaltyConfig {
  double lambda1 = 0.0;   // l1 weight on beta and theta
  double lambda2 = 0.0;   // squared-l2 weight on beta and theta
  double lambda_l = 0.0;  // weight of the latent-structure penalty
  bool exclude_intercepts = true;

  void validate() const;
};

struct ElasticNetEval {
  double value = 0.0;
  Vector smooth_grad;  // gradient of the l2 part only; l1 is handled by the prox step
};

// beta_aug = [beta0, beta, theta_flat] when has_intercept, otherwise
// [beta, theta_flat]. The intercept is skipped when cfg.exclude_intercepts.
ElasticNetEval elastic_net_value_grad(const Vector& beta_aug, const PenaltyConfig& cfg,
                                      bool has_intercept);

// sign(v) * max(|v| - t, 0) per coordinate.
Vector soft_threshold(const Vector& v, double threshold);
void soft_threshold_inplace(Eigen::Ref<Vector> v, double threshold);

// theta minus its latent reconstruction, one entry per active pair.
struct LvmResidual {
  Vector residual;
};

LvmResidual lvm_residual(const Vector& theta, const Matrix& Z, double alpha0, LvmKind kind,
                         const InteractionScheme& scheme);

double lvm_value(const Vector& theta, const Matrix& Z, double alpha0, LvmKind kind,
                 const InteractionScheme& scheme, double lambda_l);

struct LvmGrads {
  Vector theta;
  Matrix Z;
  double alpha0 = 0.0;
};

LvmGrads lvm_grads(const Vector& theta, const Matrix& Z, double alpha0, LvmKind kind,
                   const InteractionScheme& scheme, double lambda_l);

}  // namespace litlvm
