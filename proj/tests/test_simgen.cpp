#include <doctest.h>

#include <cmath>

#include "litlvm/errors.hpp"
#include "litlvm/simgen.hpp"

using namespace litlvm;

TEST_CASE("linear generator shapes") {
  SimConfig cfg;
  cfg.n = 4;
  cfg.p = 3;
  cfg.d_true = 2;
  cfg.seed = 7;
  const auto [data, truth] = gen_linear(cfg);
  CHECK(data.X.rows() == 4);
  CHECK(data.X.cols() == 3);
  CHECK(data.y.size() == 4);
  CHECK(truth.theta.size() == 3);
  CHECK(truth.Z.rows() == 3);
  CHECK(truth.Z.cols() == 2);
  CHECK(data.feature_names.size() == 3);
  CHECK_NOTHROW(data.validate());

  cfg.lvm_kind = LvmKind::latent_distance;
  CHECK_THROWS_AS(gen_linear(cfg), ArgumentError);
  cfg.lvm_kind = LvmKind::low_rank;
  cfg.d_true = 3;
  CHECK_THROWS_AS(gen_linear(cfg), ArgumentError);
  cfg.d_true = 2;
  cfg.sigma_y2 = -1.0;
  CHECK_THROWS_AS(gen_linear(cfg), ArgumentError);
}

TEST_CASE("noise-free linear generation") {
  SimConfig cfg;
  cfg.n = 50;
  cfg.p = 6;
  cfg.sigma_eps2 = 0.0;
  cfg.sigma_y2 = 0.0;
  cfg.seed = 3;
  const auto [data, truth] = gen_linear(cfg);
  const auto scheme = InteractionScheme::all_pairs(6);
  CHECK(truth.theta == reconstruct_theta(truth.Z, 0.0, LvmKind::low_rank, scheme));
  ModelParams params;
  params.beta = truth.beta;
  params.theta = truth.theta;
  params.beta0 = 0.0;
  CHECK((linear_scores(params, data.X, scheme) - data.y).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("linear generator noise levels") {
  SimConfig cfg;
  cfg.n = 5000;
  cfg.p = 10;
  cfg.seed = 11;
  const auto [data, truth] = gen_linear(cfg);
  const auto scheme = InteractionScheme::all_pairs(10);
  ModelParams params;
  params.beta = truth.beta;
  params.theta = truth.theta;
  const Vector resid = data.y - linear_scores(params, data.X, scheme);
  const double var = (resid.array() - resid.mean()).square().sum() / (resid.size() - 1.0);
  CHECK(var == doctest::Approx(0.01).epsilon(0.2));

  SimConfig wide;
  wide.n = 10;
  wide.p = 40;
  wide.seed = 12;
  const auto [d2, t2] = gen_linear(wide);
  const Vector eps = t2.theta - reconstruct_theta(t2.Z, 0.0, LvmKind::low_rank, InteractionScheme::all_pairs(40));
  const double eps_var = (eps.array() - eps.mean()).square().sum() / (eps.size() - 1.0);
  CHECK(eps_var == doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("seed determinism and nested sample sizes") {
  SimConfig cfg;
  cfg.n = 100;
  cfg.p = 8;
  cfg.seed = 21;
  const auto [a, ta] = gen_linear(cfg);
  const auto [b, tb] = gen_linear(cfg);
  CHECK(a.X == b.X);
  CHECK(a.y == b.y);
  CHECK(ta.theta == tb.theta);
  cfg.n = 200;
  const auto [c, tc] = gen_linear(cfg);
  CHECK(c.X.topRows(100) == a.X);
  CHECK(c.y.head(100) == a.y);

  SimConfig lg;
  lg.n = 100;
  lg.p = 8;
  lg.lvm_kind = LvmKind::latent_distance;
  lg.seed = 22;
  const auto [l1, lt1] = gen_logistic(lg);
  lg.n = 250;
  const auto [l2, lt2] = gen_logistic(lg);
  CHECK(l2.y.head(100) == l1.y);
  CHECK(lt2.theta == lt1.theta);
}

TEST_CASE("sparsify") {
  const rng::Stream stream(1, rng::Domain::sparsify);
  Vector v(3);
  v << 0.0, 10.0, -10.0;
  const Vector out = sparsify(v, 1e-4, stream);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 10.0);
  CHECK(out[2] == -10.0);
  CHECK(sparsify(v, 0.0, stream) == v);
  CHECK_THROWS_AS(sparsify(v, -1.0, stream), ArgumentError);

  const Vector small = Vector::Constant(100000, 0.01);
  const Vector s = sparsify(small, 1e-4, stream);
  const double rate = static_cast<double>((s.array() == 0.0).count()) / 1e5;
  CHECK(std::abs(rate - std::exp(-1.0)) < 0.01);
}

TEST_CASE("logistic generator") {
  SimConfig cfg;
  cfg.n = 500;
  cfg.p = 12;
  cfg.lvm_kind = LvmKind::latent_distance;
  cfg.seed = 31;
  const auto [data, truth] = gen_logistic(cfg);
  CHECK(((data.y.array() == 0.0) || (data.y.array() == 1.0)).all());
  CHECK_NOTHROW(data.validate());

  // Near-zero interactions are rare, so count over a few larger draws.
  Eigen::Index zeros = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SimConfig wide = cfg;
    wide.n = 10;
    wide.p = 50;
    wide.seed = seed;
    zeros += (gen_logistic(wide).second.theta.array() == 0.0).count();
  }
  CHECK(zeros > 0);

  cfg.sigma_theta2 = 0.0;
  const auto [d0, t0] = gen_logistic(cfg);
  const Vector recon = reconstruct_theta(t0.Z, t0.alpha0, LvmKind::latent_distance, InteractionScheme::all_pairs(12));
  CHECK((t0.theta_dense - recon).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(t0.alpha0 != 0.0);
}

TEST_CASE("zero ground truth gives balanced labels") {
  SimConfig cfg;
  cfg.n = 10000;
  cfg.p = 5;
  cfg.lvm_kind = LvmKind::latent_distance;
  cfg.seed = 41;
  GroundTruth zero;
  zero.beta = Vector::Zero(5);
  zero.theta = Vector::Zero(10);
  const auto [data, truth] = gen_logistic(cfg, zero);
  CHECK(std::abs(data.y.mean() - 0.5) < 0.02);

  zero.theta = Vector::Zero(9);
  CHECK_THROWS_AS(gen_logistic(cfg, zero), DimensionError);
}

TEST_CASE("outside-link noise stays a valid probability") {
  SimConfig cfg;
  cfg.n = 300;
  cfg.p = 6;
  cfg.lvm_kind = LvmKind::latent_distance;
  cfg.noise = NoisePlacement::outside_link;
  cfg.sigma_y2 = 1.0;
  const auto [data, truth] = gen_logistic(cfg);
  CHECK(((data.y.array() == 0.0) || (data.y.array() == 1.0)).all());
}
