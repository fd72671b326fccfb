#include "litlvm/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "litlvm/errors.hpp"
#include "litlvm/predictors.hpp"
#include "litlvm/rng.hpp"

namespace litlvm {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("learning_rate must be positive");
  }
  if (max_epochs < 1) throw ArgumentError("max_epochs must be at least 1");
  if (!(tol >= 0.0)) throw ArgumentError("tol must be non-negative");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
    throw ArgumentError("Adam moment decay rates must lie in [0,1)");
  }
  if (!(adam_eps > 0.0)) throw ArgumentError("adam_eps must be positive");
}

ModelParams init_params(std::size_t p, std::size_t d, LvmKind kind,
                        const InteractionScheme& scheme, std::uint64_t seed, bool has_intercept) {
  if (scheme.p() != p) throw DimensionError("scheme width does not match p");
  if (kind != LvmKind::none && (d < 1 || d >= p)) {
    throw ArgumentError("latent dimension d=" + std::to_string(d) + " must satisfy 1 <= d < p=" +
                        std::to_string(p));
  }
  ModelParams params;
  params.lvm_kind = kind;
  params.has_intercept = has_intercept;
  params.beta0 = has_intercept ? rng::Stream(seed, rng::Domain::init_intercept).normal(0, 0) : 0.0;

  const rng::Stream beta_stream(seed, rng::Domain::init_beta);
  params.beta.resize(static_cast<Eigen::Index>(p));
  for (std::size_t j = 0; j < p; ++j) params.beta[static_cast<Eigen::Index>(j)] = beta_stream.normal(0, j);

  const rng::Stream theta_stream(seed, rng::Domain::init_theta);
  const auto& lex = scheme.lex_indices();
  params.theta.resize(static_cast<Eigen::Index>(lex.size()));
  for (std::size_t f = 0; f < lex.size(); ++f) {
    params.theta[static_cast<Eigen::Index>(f)] = theta_stream.normal(0, lex[f]);
  }

  if (kind != LvmKind::none) {
    const rng::Stream latent_stream(seed, rng::Domain::init_latent);
    params.Z.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t c = 0; c < d; ++c) {
        params.Z(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) =
            latent_stream.normal(static_cast<std::uint32_t>(j), c);
      }
    }
  }
  params.alpha0 = 0.0;
  return params;
}

namespace {

// Positions of each parameter block inside the flat optimisation vector.
struct Layout {
  bool intercept = true;
  bool alpha = false;
  Eigen::Index p = 0, m = 0, z_rows = 0, z_cols = 0;

  Eigen::Index beta_at() const { return intercept ? 1 : 0; }
  Eigen::Index theta_at() const { return beta_at() + p; }
  Eigen::Index z_at() const { return theta_at() + m; }
  Eigen::Index alpha_at() const { return z_at() + z_rows * z_cols; }
  Eigen::Index size() const { return alpha_at() + (alpha ? 1 : 0); }
};

Vector pack(const Layout& L, const ModelParams& params) {
  Vector w(L.size());
  if (L.intercept) w[0] = params.beta0;
  w.segment(L.beta_at(), L.p) = params.beta;
  w.segment(L.theta_at(), L.m) = params.theta;
  if (L.z_rows * L.z_cols > 0) {
    w.segment(L.z_at(), L.z_rows * L.z_cols) =
        Eigen::Map<const Vector>(params.Z.data(), L.z_rows * L.z_cols);
  }
  if (L.alpha) w[L.alpha_at()] = params.alpha0;
  return w;
}

void unpack(const Layout& L, const Vector& w, ModelParams& params) {
  params.beta0 = L.intercept ? w[0] : 0.0;
  params.beta = w.segment(L.beta_at(), L.p);
  params.theta = w.segment(L.theta_at(), L.m);
  if (L.z_rows * L.z_cols > 0) {
    params.Z = Eigen::Map<const Matrix>(w.data() + L.z_at(), L.z_rows, L.z_cols);
  }
  params.alpha0 = L.alpha ? w[L.alpha_at()] : 0.0;
}

// Evaluates the total loss at `params`; fills the gradient of its smooth part
// (everything except lambda1 * |.|_1) in layout order when grad != nullptr.
class InteractionObjective {
 public:
  InteractionObjective(const Dataset& data, const InteractionScheme& scheme,
                       const PenaltyConfig& penalty, TaskKind task, LvmKind kind)
      : data_(data), scheme_(scheme), penalty_(penalty), task_(task), kind_(kind) {}

  LossComponents operator()(const Layout& L, const ModelParams& params, Vector* grad) const {
    const Vector scores = linear_scores(params, data_.X, scheme_);
    const LossEval pred = prediction_loss(task_, scores, data_);

    LossComponents out;
    out.pred = pred.value;
    out.reg = penalty_.lambda2 * (params.beta.squaredNorm() + params.theta.squaredNorm()) +
              penalty_.lambda1 * (params.beta.lpNorm<1>() + params.theta.lpNorm<1>());
    const bool use_lvm = kind_ != LvmKind::none && penalty_.lambda_l > 0.0 && L.m > 0;
    if (use_lvm) {
      out.lvm = lvm_value(params.theta, params.Z, params.alpha0, kind_, scheme_, penalty_.lambda_l);
    }
    out.total = out.pred + out.reg + out.lvm;

    if (grad != nullptr) {
      Vector& gw = *grad;
      gw.setZero(L.size());
      if (L.intercept) gw[0] = pred.grad.sum();
      gw.segment(L.beta_at(), L.p) =
          data_.X.transpose() * pred.grad + 2.0 * penalty_.lambda2 * params.beta;
      if (L.m > 0) {
        gw.segment(L.theta_at(), L.m) = weighted_pair_moments(data_.X, pred.grad, scheme_) +
                                        2.0 * penalty_.lambda2 * params.theta;
      }
      if (use_lvm) {
        const LvmGrads lg = lvm_grads(params.theta, params.Z, params.alpha0, kind_, scheme_,
                                      penalty_.lambda_l);
        gw.segment(L.theta_at(), L.m) += lg.theta;
        gw.segment(L.z_at(), L.z_rows * L.z_cols) +=
            Eigen::Map<const Vector>(lg.Z.data(), L.z_rows * L.z_cols);
        if (L.alpha) gw[L.alpha_at()] += lg.alpha0;
      }
    }
    return out;
  }

 private:
  const Dataset& data_;
  const InteractionScheme& scheme_;
  const PenaltyConfig& penalty_;
  TaskKind task_;
  LvmKind kind_;
};

// Interaction contribution of a factorization machine for every row, plus
// the map from per-row weights g to d(sum_i g_i s_i)/dZ.
class FmTerms {
 public:
  FmTerms(const Matrix& X, const InteractionScheme& scheme)
      : X_(X), scheme_(scheme), full_(scheme.is_full()) {
    if (full_) X2_ = X.array().square();
  }

  Vector scores(const Matrix& Z) const {
    if (scheme_.empty()) return Vector::Zero(X_.rows());
    if (full_) {
      const Matrix XZ = X_ * Z;
      return 0.5 * (XZ.rowwise().squaredNorm() - X2_ * Z.rowwise().squaredNorm());
    }
    const Matrix S = symmetric_theta(reconstruct_theta(Z, 0.0, LvmKind::low_rank, scheme_), scheme_);
    return 0.5 * (X_ * S).cwiseProduct(X_).rowwise().sum();
  }

  Matrix grad(const Matrix& Z, const Vector& g) const {
    if (scheme_.empty()) return Matrix::Zero(Z.rows(), Z.cols());
    if (full_) {
      const Matrix XZ = X_ * Z;
      const Matrix weighted = XZ.array().colwise() * g.array();
      Matrix out = X_.transpose() * weighted;
      const Vector diag = X2_.transpose() * g;
      out -= diag.asDiagonal() * Z;
      return out;
    }
    const Vector moments = weighted_pair_moments(X_, g, scheme_);
    return symmetric_theta(moments, scheme_) * Z;
  }

 private:
  const Matrix& X_;
  const InteractionScheme& scheme_;
  bool full_;
  Matrix X2_;
};

class FmObjective {
 public:
  FmObjective(const Dataset& data, const InteractionScheme& scheme, const PenaltyConfig& penalty,
              TaskKind task)
      : data_(data), penalty_(penalty), task_(task), terms_(data.X, scheme) {}

  LossComponents operator()(const Layout& L, const ModelParams& params, Vector* grad) const {
    Vector scores = data_.X * params.beta + terms_.scores(params.Z);
    if (L.intercept) scores.array() += params.beta0;
    if (!scores.allFinite()) throw NumericError("factorization machine scores are not finite");
    const LossEval pred = prediction_loss(task_, scores, data_);

    LossComponents out;
    out.pred = pred.value;
    out.reg = penalty_.lambda2 * (params.beta.squaredNorm() + params.Z.squaredNorm()) +
              penalty_.lambda1 * params.beta.lpNorm<1>();
    out.total = out.pred + out.reg;

    if (grad != nullptr) {
      Vector& gw = *grad;
      gw.setZero(L.size());
      if (L.intercept) gw[0] = pred.grad.sum();
      gw.segment(L.beta_at(), L.p) =
          data_.X.transpose() * pred.grad + 2.0 * penalty_.lambda2 * params.beta;
      const Matrix gz = terms_.grad(params.Z, pred.grad) + 2.0 * penalty_.lambda2 * params.Z;
      gw.segment(L.z_at(), L.z_rows * L.z_cols) =
          Eigen::Map<const Vector>(gz.data(), L.z_rows * L.z_cols);
    }
    return out;
  }

 private:
  const Dataset& data_;
  const PenaltyConfig& penalty_;
  TaskKind task_;
  FmTerms terms_;
};

bool finite(const LossComponents& c) {
  return std::isfinite(c.total) && std::isfinite(c.pred) && std::isfinite(c.reg) &&
         std::isfinite(c.lvm);
}

// Proximal Adam loop shared by both model kinds. The l1 prox is applied to
// `l1_blocks` (offset, length) with threshold learning_rate * lambda1.
template <typename Objective>
FitResult run_proximal_adam(const Objective& objective, const Layout& L, ModelParams params,
                            const FitConfig& cfg,
                            std::vector<std::pair<Eigen::Index, Eigen::Index>> l1_blocks) {
  const auto& opt = cfg.optimizer;
  const auto started = std::chrono::steady_clock::now();

  FitResult result;
  FitReport& report = result.report;

  Vector w = pack(L, params);
  Vector grad;
  Vector m1 = Vector::Zero(L.size());
  Vector m2 = Vector::Zero(L.size());

  auto evaluate = [&](std::size_t epoch) {
    try {
      const LossComponents c = objective(L, params, &grad);
      if (!finite(c) || !grad.allFinite()) throw NumericError("non-finite loss or gradient");
      return c;
    } catch (const NumericError& e) {
      throw DivergenceError(epoch, e.what());
    }
  };

  LossComponents current = evaluate(0);
  report.trajectory.push_back(current);
  report.best = current;
  Vector best_w = w;

  const double threshold = opt.learning_rate * cfg.penalty.lambda1;
  double beta1_pow = 1.0;
  double beta2_pow = 1.0;
  std::size_t stalled = 0;

  for (std::size_t epoch = 1; epoch <= opt.max_epochs; ++epoch) {
    beta1_pow *= opt.adam_beta1;
    beta2_pow *= opt.adam_beta2;
    m1 = opt.adam_beta1 * m1 + (1.0 - opt.adam_beta1) * grad;
    m2 = opt.adam_beta2 * m2 + (1.0 - opt.adam_beta2) * grad.cwiseAbs2();
    const double step = opt.learning_rate / (1.0 - beta1_pow);
    const double c2 = 1.0 / (1.0 - beta2_pow);
    w.array() -= step * m1.array() / ((m2.array() * c2).sqrt() + opt.adam_eps);
    if (threshold > 0.0) {
      for (const auto& [at, len] : l1_blocks) soft_threshold_inplace(w.segment(at, len), threshold);
    }
    if (!w.allFinite()) throw DivergenceError(epoch, "parameters became non-finite");

    unpack(L, w, params);
    const double previous = current.total;
    current = evaluate(epoch);
    report.trajectory.push_back(current);
    report.epochs = epoch;

    if (current.total < report.best.total) {
      report.best = current;
      report.best_epoch = epoch;
      best_w = w;
    }
    const double denom = std::max(std::abs(previous), std::numeric_limits<double>::min());
    stalled = std::abs(previous - current.total) / denom < opt.tol ? stalled + 1 : 0;
    if (stalled >= std::max<std::size_t>(opt.patience, 1)) {
      report.converged = true;
      break;
    }
  }

  unpack(L, best_w, params);
  result.params = std::move(params);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

void check_fit_inputs(const Dataset& data, const InteractionScheme& scheme, const FitConfig& cfg) {
  if (data.task != cfg.task) throw ArgumentError("dataset task does not match fit config");
  data.validate();
  cfg.penalty.validate();
  cfg.optimizer.validate();
  if (scheme.p() != data.p()) throw DimensionError("scheme width does not match dataset");
  if (data.n() == 0) throw DegenerateInputError("cannot fit on an empty dataset");
  if (cfg.task == TaskKind::survival && data.event_count() == 0) {
    throw DegenerateInputError("survival fit needs at least one observed event");
  }
}

ModelParams starting_point(const Dataset& data, const InteractionScheme& scheme,
                           const FitConfig& cfg, LvmKind kind) {
  const bool intercept = cfg.task != TaskKind::survival;
  if (cfg.initial) {
    ModelParams init = *cfg.initial;
    init.has_intercept = intercept;
    if (!intercept) init.beta0 = 0.0;
    // A warm start from a model without an LVM block gets fresh latent vectors.
    if (kind != LvmKind::none && init.Z.size() == 0) {
      init.Z = init_params(data.p(), cfg.latent_dim, kind, scheme, cfg.optimizer.seed, intercept).Z;
    }
    if (kind == LvmKind::none) init.Z.resize(0, 0);
    init.lvm_kind = kind;
    init.validate(scheme);
    return init;
  }
  return init_params(data.p(), cfg.latent_dim, kind, scheme, cfg.optimizer.seed, intercept);
}

}  // namespace

LossComponents total_loss(const ModelParams& params, const Dataset& data,
                          const InteractionScheme& scheme, const PenaltyConfig& penalty,
                          TaskKind task) {
  penalty.validate();
  Layout L;
  L.intercept = params.has_intercept;
  L.p = static_cast<Eigen::Index>(params.p());
  L.m = static_cast<Eigen::Index>(scheme.size());
  L.z_rows = params.Z.rows();
  L.z_cols = params.Z.cols();
  L.alpha = params.lvm_kind == LvmKind::latent_distance;
  return InteractionObjective(data, scheme, penalty, task, params.lvm_kind)(L, params, nullptr);
}

SmoothGradient smooth_gradient(const ModelParams& params, const Dataset& data,
                               const InteractionScheme& scheme, const FitConfig& cfg) {
  cfg.penalty.validate();
  const bool fm = cfg.model == ModelKind::factorization_machine;
  Layout L;
  L.intercept = params.has_intercept;
  L.p = static_cast<Eigen::Index>(params.p());
  L.m = fm ? 0 : static_cast<Eigen::Index>(scheme.size());
  L.z_rows = params.Z.rows();
  L.z_cols = params.Z.cols();
  L.alpha = !fm && params.lvm_kind == LvmKind::latent_distance;

  SmoothGradient out;
  Vector g;
  if (fm) {
    out.loss = FmObjective(data, scheme, cfg.penalty, cfg.task)(L, params, &g);
  } else {
    out.loss = InteractionObjective(data, scheme, cfg.penalty, cfg.task, params.lvm_kind)(L, params, &g);
  }
  out.grad = params;
  unpack(L, g, out.grad);
  if (fm) out.grad.theta.resize(0);
  return out;
}

FitResult fit(const Dataset& data, const InteractionScheme& scheme, const FitConfig& cfg) {
  if (cfg.model != ModelKind::interactions) throw ArgumentError("fit() expects model=interactions");
  check_fit_inputs(data, scheme, cfg);
  ModelParams params = starting_point(data, scheme, cfg, cfg.lvm_kind);

  Layout L;
  L.intercept = params.has_intercept;
  L.p = static_cast<Eigen::Index>(data.p());
  L.m = static_cast<Eigen::Index>(scheme.size());
  L.z_rows = params.Z.rows();
  L.z_cols = params.Z.cols();
  L.alpha = cfg.lvm_kind == LvmKind::latent_distance;

  const InteractionObjective objective(data, scheme, cfg.penalty, cfg.task, cfg.lvm_kind);
  return run_proximal_adam(objective, L, std::move(params), cfg,
                           {{L.beta_at(), L.p}, {L.theta_at(), L.m}});
}

FitResult fit_fm(const Dataset& data, const InteractionScheme& scheme, const FitConfig& cfg) {
  check_fit_inputs(data, scheme, cfg);
  if (cfg.latent_dim < 1) throw ArgumentError("factorization machine needs d >= 1");
  ModelParams params = starting_point(data, scheme, cfg, LvmKind::low_rank);

  Layout L;
  L.intercept = params.has_intercept;
  L.p = static_cast<Eigen::Index>(data.p());
  L.m = 0;
  L.z_rows = params.Z.rows();
  L.z_cols = params.Z.cols();
  L.alpha = false;
  params.theta.resize(0);

  const FmObjective objective(data, scheme, cfg.penalty, cfg.task);
  FitResult result = run_proximal_adam(objective, L, std::move(params), cfg, {{L.beta_at(), L.p}});
  result.params.alpha0 = 0.0;
  result.params.theta = reconstruct_theta(result.params.Z, 0.0, LvmKind::low_rank, scheme);
  return result;
}

FitResult train(const Dataset& data, const InteractionScheme& scheme, const FitConfig& cfg) {
  return cfg.model == ModelKind::factorization_machine ? fit_fm(data, scheme, cfg)
                                                       : fit(data, scheme, cfg);
}

double fm_interaction_score(const Matrix& Z, std::span<const double> x,
                            const InteractionScheme& scheme) {
  const Vector inter = expand_interactions(x, scheme);
  return inter.dot(reconstruct_theta(Z, 0.0, LvmKind::low_rank, scheme));
}

Matrix fm_interaction_score_grad(const Matrix& Z, std::span<const double> x,
                                 const InteractionScheme& scheme) {
  if (static_cast<std::size_t>(Z.rows()) != scheme.p()) throw DimensionError("Z must have p rows");
  Matrix X(1, static_cast<Eigen::Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) X(0, static_cast<Eigen::Index>(j)) = x[j];
  return FmTerms(X, scheme).grad(Z, Vector::Ones(1));
}

}  // namespace litlvm
