#include <doctest.h>

#include <cmath>
#include <random>

#include "litlvm/errors.hpp"
#include "litlvm/predictors.hpp"
#include "support.hpp"

using namespace litlvm;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

// Breslow negative log partial likelihood by direct summation.
double cox_oracle(const Vector& s, const Vector& t, const Vector& e) {
  double total = 0.0;
  double events = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (e[i] != 1.0) continue;
    double risk = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (t[j] >= t[i]) risk += std::exp(s[j]);
    }
    total += s[i] - std::log(risk);
    events += 1.0;
  }
  return -total / events;
}

Vector random_times(std::mt19937_64& gen, Eigen::Index n) {
  std::uniform_int_distribution<int> pick(1, 8);  // small support forces ties
  Vector t(n);
  for (Eigen::Index i = 0; i < n; ++i) t[i] = pick(gen);
  return t;
}

Vector random_events(std::mt19937_64& gen, Eigen::Index n) {
  std::bernoulli_distribution coin(0.6);
  Vector e(n);
  for (Eigen::Index i = 0; i < n; ++i) e[i] = coin(gen) ? 1.0 : 0.0;
  e[0] = 1.0;
  return e;
}

}  // namespace

TEST_CASE("mse examples and gradient") {
  const auto zero = mse_loss_grad(vec({1, 2}), vec({1, 2}));
  CHECK(zero.value == 0.0);
  CHECK(zero.grad.isZero());
  const auto hand = mse_loss_grad(vec({1, 2}), vec({0, 2}));
  CHECK(hand.value == doctest::Approx(0.5));
  CHECK(hand.grad[0] == doctest::Approx(1.0));
  CHECK(hand.grad[1] == 0.0);
  CHECK_THROWS_AS(mse_loss_grad(Vector(), Vector()), ArgumentError);

  std::mt19937_64 gen(21);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector s = testing::random_vector(gen, 50);
    const Vector y = testing::random_vector(gen, 50);
    auto f = [&](const Vector& v) { return mse_loss_grad(v, y).value; };
    CHECK(testing::relative_error(mse_loss_grad(s, y).grad, testing::numeric_gradient(f, s)) < 1e-6);
  }
}

TEST_CASE("logistic loss examples, stability and gradient") {
  CHECK(logistic_loss_grad(vec({0}), vec({1})).value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  const auto saturated = logistic_loss_grad(vec({40}), vec({1}));
  CHECK(saturated.value < 1e-15);
  CHECK(std::isfinite(saturated.value));
  for (double s : {-1e4, -700.0, 700.0, 1e4}) {
    CHECK(std::isfinite(logistic_loss_grad(vec({s}), vec({0})).value));
    CHECK(std::isfinite(logistic_loss_grad(vec({s}), vec({1})).value));
  }
  CHECK_THROWS_AS(logistic_loss_grad(vec({0}), vec({2})), ArgumentError);

  std::mt19937_64 gen(22);
  std::bernoulli_distribution coin(0.5);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector s = testing::random_vector(gen, 50, 2.0);
    Vector y(50);
    for (Eigen::Index i = 0; i < 50; ++i) y[i] = coin(gen) ? 1.0 : 0.0;
    auto f = [&](const Vector& v) { return logistic_loss_grad(v, y).value; };
    CHECK(testing::relative_error(logistic_loss_grad(s, y).grad, testing::numeric_gradient(f, s)) < 1e-5);
  }
}

TEST_CASE("cox loss examples") {
  CHECK(cox_loss_grad(vec({0, 0}), vec({1, 2}), vec({1, 1})).value ==
        doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-12));
  CHECK_THROWS_AS(cox_loss_grad(vec({0, 0}), vec({1, 2}), vec({0, 0})), DegenerateInputError);

  // One tie (t=3) and two censored subjects.
  const Vector t = vec({5, 3, 3, 1, 4, 2});
  const Vector e = vec({1, 1, 1, 0, 0, 1});
  const Vector s = vec({0.2, -1.0, 0.5, 1.5, -0.3, 0.8});
  CHECK(cox_loss_grad(s, t, e).value == doctest::Approx(cox_oracle(s, t, e)).epsilon(1e-13));
  for (double c : {-50.0, -3.0, 7.5, 50.0}) {
    CHECK(std::abs(cox_loss_grad(s, t, e).value - cox_loss_grad(s.array() + c, t, e).value) < 1e-10);
  }
}

TEST_CASE("cox loss matches the oracle and finite differences") {
  std::mt19937_64 gen(23);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index n = 30;
    const Vector s = testing::random_vector(gen, n);
    const Vector t = random_times(gen, n);
    const Vector e = random_events(gen, n);
    CHECK(cox_loss_grad(s, t, e).value == doctest::Approx(cox_oracle(s, t, e)).epsilon(1e-12));
    auto f = [&](const Vector& v) { return cox_loss_grad(v, t, e).value; };
    CHECK(testing::relative_error(cox_loss_grad(s, t, e).grad, testing::numeric_gradient(f, s)) < 1e-5);
  }
}

TEST_CASE("breslow baseline") {
  const auto single = breslow_baseline(vec({0, 0, 0, 0}), vec({1, 2, 3, 4}), vec({0, 1, 0, 0}));
  REQUIRE(single.times.size() == 1);
  CHECK(single.cumhaz[0] == doctest::Approx(1.0 / 3.0));
  CHECK(single.at(1.5) == 0.0);
  CHECK(single.at(2.0) == doctest::Approx(1.0 / 3.0));

  // Hand enumeration, n=5: times 1,2,2,3,4 with events 1,1,0,0,1.
  const Vector s = vec({0.0, std::log(2.0), 0.0, std::log(3.0), 0.0});
  const auto h = breslow_baseline(s, vec({1, 2, 2, 3, 4}), vec({1, 1, 0, 0, 1}));
  REQUIRE(h.times == std::vector<double>{1, 2, 4});
  const double h1 = 1.0 / (1 + 2 + 1 + 3 + 1);
  const double h2 = h1 + 1.0 / (2 + 1 + 3 + 1);
  const double h4 = h2 + 1.0 / 1.0;
  CHECK(h.cumhaz[0] == doctest::Approx(h1).epsilon(1e-14));
  CHECK(h.cumhaz[1] == doctest::Approx(h2).epsilon(1e-14));
  CHECK(h.cumhaz[2] == doctest::Approx(h4).epsilon(1e-14));
  CHECK(h.at(3.5) == doctest::Approx(h2).epsilon(1e-14));
  CHECK_THROWS_AS(breslow_baseline(vec({0}), vec({1}), vec({0})), DegenerateInputError);

  std::mt19937_64 gen(24);
  const Vector rs = testing::random_vector(gen, 40);
  const auto rh = breslow_baseline(rs, random_times(gen, 40), random_events(gen, 40));
  for (std::size_t i = 1; i < rh.cumhaz.size(); ++i) CHECK(rh.cumhaz[i] >= rh.cumhaz[i - 1]);
}

TEST_CASE("predict per task") {
  const auto scheme = InteractionScheme::all_pairs(3);
  ModelParams zero;
  zero.beta = Vector::Zero(3);
  zero.theta = Vector::Zero(3);
  std::mt19937_64 gen(25);
  const Matrix X = testing::random_matrix(gen, 10, 3);
  CHECK((predict(zero, X, scheme, TaskKind::classification).response.array() == 0.5).all());

  ModelParams params = zero;
  params.beta0 = 0.1;
  params.beta = testing::random_vector(gen, 3);
  params.theta = testing::random_vector(gen, 3);
  const auto reg = predict(params, X, scheme, TaskKind::regression);
  CHECK((reg.response - linear_scores(params, X, scheme)).norm() == 0.0);

  params.beta *= 1e3;
  const auto cls = predict(params, X, scheme, TaskKind::classification);
  CHECK((cls.response.array() > 0.0).all());
  CHECK((cls.response.array() < 1.0).all());
}

TEST_CASE("survival curves") {
  const Vector scores = vec({0.0, 1.0, -1.0});
  const Vector times = vec({2, 3, 5});
  const Vector events = vec({1, 0, 1});
  const auto base = breslow_baseline(scores, times, events);
  const std::vector<double> grid{0.5, 1.9, 2.0, 4.0, 6.0};
  const Matrix S = survival_curves(scores, base, grid);
  CHECK((S.col(0).array() == 1.0).all());
  CHECK((S.col(1).array() == 1.0).all());
  for (Eigen::Index i = 0; i < S.rows(); ++i)
    for (Eigen::Index c = 1; c < S.cols(); ++c) CHECK(S(i, c) <= S(i, c - 1));
  CHECK(S(1, 2) == doctest::Approx(std::exp(-base.at(2.0) * std::exp(1.0))));
  CHECK_THROWS_AS(survival_curves(scores, std::nullopt, grid), StateError);
}
