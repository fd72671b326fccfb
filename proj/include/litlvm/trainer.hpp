#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "litlvm/core.hpp"
#include "litlvm/penalties.hpp"

namespace litlvm {

struct OptimizerConfig {
  double learning_rate = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::size_t max_epochs = 2000;
  double tol = 1e-6;  // relative change of the total loss
  std::size_t patience = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class ModelKind {
  interactions,          // free theta, optionally pulled towards an LVM
  factorization_machine  // theta tied to Z Z^T
};

struct FitConfig {
  TaskKind task = TaskKind::regression;
  ModelKind model = ModelKind::interactions;
  LvmKind lvm_kind = LvmKind::none;
  std::size_t latent_dim = 2;
  PenaltyConfig penalty;
  OptimizerConfig optimizer;
  // Warm start; must match the layout fit() would initialise.
  std::optional<ModelParams> initial;
};

struct LossComponents {
  double pred = 0.0;
  double reg = 0.0;  // elastic net, weights included
  double lvm = 0.0;  // latent penalty, lambda_l included
  double total = 0.0;
};

struct FitReport {
  std::vector<LossComponents> trajectory;  // entry 0 is the initial point
  std::size_t epochs = 0;
  bool converged = false;
  double wall_seconds = 0.0;
  std::size_t best_epoch = 0;
  LossComponents best;
};

struct FitResult {
  ModelParams params;
  FitReport report;
};

// Standard-normal draws for beta0, beta, theta and Z; alpha0 starts at 0.
// Each block comes from its own counter stream and theta entries are keyed by
// their lexicographic pair index, so the draw for a coefficient does not
// depend on the mask or on the LVM kind.
ModelParams init_params(std::size_t p, std::size_t d, LvmKind kind,
                        const InteractionScheme& scheme, std::uint64_t seed,
                        bool has_intercept = true);

LossComponents total_loss(const ModelParams& params, const Dataset& data,
                          const InteractionScheme& scheme, const PenaltyConfig& penalty,
                          TaskKind task);

struct SmoothGradient {
  LossComponents loss;  // full loss, l1 term included
  ModelParams grad;     // gradient of everything except the l1 term, same shape as params
};

// The quantity the optimiser differentiates each epoch. For the factorization
// machine, params.theta is ignored.
SmoothGradient smooth_gradient(const ModelParams& params, const Dataset& data,
                               const InteractionScheme& scheme, const FitConfig& cfg);

// Proximal Adam on the total loss. Returns the lowest-loss iterate seen.
FitResult fit(const Dataset& data, const InteractionScheme& scheme, const FitConfig& cfg);

// Factorization machine baseline: theta is not free, scores use Z Z^T.
// The returned params carry theta = upper(Z Z^T) so they predict like any
// other model.
FitResult fit_fm(const Dataset& data, const InteractionScheme& scheme, const FitConfig& cfg);

// Dispatch on cfg.model.
FitResult train(const Dataset& data, const InteractionScheme& scheme, const FitConfig& cfg);

// Interaction part of a factorization machine score, sum over active pairs
// of (z_j . z_k) x_j x_k, and its gradient with respect to Z.
double fm_interaction_score(const Matrix& Z, std::span<const double> x,
                            const InteractionScheme& scheme);
Matrix fm_interaction_score_grad(const Matrix& Z, std::span<const double> x,
                                 const InteractionScheme& scheme);

}  // namespace litlvm
