#pragma once

#include <cstdint>
#include <optional>

#include "litlvm/core.hpp"
#include "litlvm/rng.hpp"

namespace litlvm {

enum class NoisePlacement {
  inside_link,  // y ~ Bernoulli(logistic(score + eta))
  outside_link  // y ~ Bernoulli(clamp(logistic(score) + eta, 0, 1))
};

struct SimConfig {
  std::size_t n = 1000;
  std::size_t p = 10;
  std::size_t d_true = 2;
  double sigma_eps2 = 0.1;     // deviation from low rank (linear generator)
  double sigma_s2 = 1e-4;      // sparsification scale
  double sigma_theta2 = 0.1;   // deviation from the latent model (logistic generator)
  double sigma_y2 = 0.01;      // response noise
  LvmKind lvm_kind = LvmKind::low_rank;
  NoisePlacement noise = NoisePlacement::inside_link;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  Vector beta;
  Vector theta;  // all C(p,2) pairs in lexicographic order
  Matrix Z;
  double alpha0 = 0.0;
  // Before sparsification; equal to beta/theta for the linear generator.
  Vector beta_dense;
  Vector theta_dense;
};

// Linear regression with approximately low-rank interactions:
// y = X beta + X_int theta + eta, theta_jk = z_j.z_k + eps_jk.
std::pair<Dataset, GroundTruth> gen_linear(const SimConfig& cfg);

// Zero each entry with probability exp(-b^2 / sigma_s2). `index_offset`
// keys the uniform draws so separate blocks use distinct counters.
Vector sparsify(const Vector& dense, double sigma_s2, const rng::Stream& stream,
                std::uint64_t index_offset = 0);

// Logistic regression with sparsified coefficients. Theta follows the latent
// distance model (or low rank when cfg.lvm_kind says so). When `truth` is
// given, it replaces the generated coefficients.
std::pair<Dataset, GroundTruth> gen_logistic(const SimConfig& cfg,
                                             const std::optional<GroundTruth>& truth = std::nullopt);

// Standard-normal design; row i depends only on (seed, i).
Matrix draw_features(std::size_t n, std::size_t p, std::uint64_t seed);

}  // namespace litlvm
