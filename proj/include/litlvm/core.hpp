#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace litlvm {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class TaskKind { regression, classification, survival };
enum class LvmKind { none, low_rank, latent_distance };

std::string_view to_string(TaskKind task);
std::string_view to_string(LvmKind kind);
TaskKind parse_task(std::string_view name);
LvmKind parse_lvm_kind(std::string_view name);

// Dense design matrix plus the target for one task. For regression and
// classification the target lives in `y`; survival uses `time`/`event`.
struct Dataset {
  TaskKind task = TaskKind::regression;
  Matrix X;
  Vector y;
  Vector time;
  Vector event;
  std::vector<std::string> feature_names;

  std::size_t n() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(X.cols()); }

  // Throws DataError when an invariant is broken.
  void validate() const;

  Dataset subset(std::span<const std::size_t> rows) const;
  std::size_t event_count() const;
};

struct FeaturePair {
  std::size_t j;
  std::size_t k;
  friend bool operator==(const FeaturePair&, const FeaturePair&) = default;
};

// Canonical ordering of the C(p,2) feature pairs (j<k, lexicographic) with a
// 0/1 mask. Only unmasked ("active") pairs own a slot in theta_flat.
class InteractionScheme {
 public:
  static constexpr int kOrderingVersion = 1;

  InteractionScheme() = default;

  static InteractionScheme all_pairs(std::size_t p);
  static InteractionScheme no_pairs(std::size_t p);
  static InteractionScheme from_mask(std::size_t p, std::vector<std::uint8_t> mask);
  static InteractionScheme from_pairs(std::size_t p, std::span<const FeaturePair> pairs);
  // Targeted interactions between two feature groups.
  static InteractionScheme bipartite(std::size_t p, std::span<const std::size_t> group_a,
                                     std::span<const std::size_t> group_b);

  static std::size_t pair_count(std::size_t p) { return p < 2 ? 0 : p * (p - 1) / 2; }
  // Position of (j,k), j<k, in the full lexicographic ordering.
  static std::size_t lex_index(std::size_t p, std::size_t j, std::size_t k);

  std::size_t p() const { return p_; }
  std::size_t size() const { return active_.size(); }
  bool empty() const { return active_.empty(); }
  bool is_full() const { return active_.size() == mask_.size(); }

  const std::vector<FeaturePair>& pairs() const { return active_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }
  // Lexicographic index of each active pair, aligned with pairs().
  const std::vector<std::size_t>& lex_indices() const { return lex_of_flat_; }

  std::optional<std::size_t> flat_index(std::size_t j, std::size_t k) const;

  friend bool operator==(const InteractionScheme& a, const InteractionScheme& b) {
    return a.p_ == b.p_ && a.mask_ == b.mask_;
  }

 private:
  InteractionScheme(std::size_t p, std::vector<std::uint8_t> mask);

  std::size_t p_ = 0;
  std::vector<std::uint8_t> mask_;
  std::vector<FeaturePair> active_;
  std::vector<std::size_t> lex_of_flat_;
  std::vector<std::int64_t> flat_of_lex_;
};

struct ModelParams {
  LvmKind lvm_kind = LvmKind::none;
  bool has_intercept = true;
  double beta0 = 0.0;
  Vector beta;
  Vector theta;  // one entry per active pair of the scheme
  Matrix Z;      // p x d; empty when lvm_kind == none
  double alpha0 = 0.0;

  std::size_t p() const { return static_cast<std::size_t>(beta.size()); }
  std::size_t latent_dim() const { return static_cast<std::size_t>(Z.cols()); }

  void validate(const InteractionScheme& scheme) const;
};

Vector expand_interactions(std::span<const double> x, const InteractionScheme& scheme);

double linear_score(const ModelParams& params, std::span<const double> x,
                    const InteractionScheme& scheme);

// Scores for every row of X. Uses the symmetric interaction matrix so the
// cost is O(n p^2) without materialising the interaction design.
Vector linear_scores(const ModelParams& params, const Matrix& X, const InteractionScheme& scheme);

Vector reconstruct_theta(const Matrix& Z, double alpha0, LvmKind kind,
                         const InteractionScheme& scheme);

Vector flatten_theta(const Matrix& theta_upper, const InteractionScheme& scheme);
Matrix unflatten_theta(const Vector& theta_flat, const InteractionScheme& scheme);
// Both triangles filled, zero diagonal.
Matrix symmetric_theta(const Vector& theta_flat, const InteractionScheme& scheme);

// For per-row weights g: entry (j,k) of X^T diag(g) X for every active pair.
Vector weighted_pair_moments(const Matrix& X, const Vector& g, const InteractionScheme& scheme);

struct Standardizer {
  Vector mean;
  Vector scale;

  static Standardizer fit(const Matrix& X);
  Matrix apply(const Matrix& X) const;
  bool empty() const { return mean.size() == 0; }
};

}  // namespace litlvm
