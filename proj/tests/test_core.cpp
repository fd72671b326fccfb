#include <doctest.h>

#include <Eigen/SVD>
#include <random>
#include <vector>

#include "litlvm/core.hpp"
#include "litlvm/errors.hpp"
#include "support.hpp"

using namespace litlvm;

namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

// Direct double loop over every active pair.
double brute_score(const ModelParams& params, const std::vector<double>& x,
                   const InteractionScheme& scheme) {
  double s = params.has_intercept ? params.beta0 : 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += params.beta[static_cast<Eigen::Index>(j)] * x[j];
  const std::size_t p = x.size();
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j + 1; k < p; ++k) {
      if (auto f = scheme.flat_index(j, k)) s += params.theta[static_cast<Eigen::Index>(*f)] * x[j] * x[k];
    }
  }
  return s;
}

}  // namespace

TEST_CASE("lexicographic pair ordering") {
  const auto s = InteractionScheme::all_pairs(4);
  REQUIRE(s.size() == 6);
  const std::vector<FeaturePair> expected{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  CHECK(s.pairs() == expected);
  for (std::size_t f = 0; f < expected.size(); ++f) {
    CHECK(InteractionScheme::lex_index(4, expected[f].j, expected[f].k) == f);
    CHECK(s.flat_index(expected[f].j, expected[f].k) == f);
  }
  CHECK(InteractionScheme::pair_count(1) == 0);
  CHECK(InteractionScheme::no_pairs(5).empty());
}

TEST_CASE("expand_interactions") {
  const std::vector<double> x{1, 2, 3};
  CHECK(to_std(expand_interactions(x, InteractionScheme::all_pairs(3))) == std::vector<double>{2, 3, 6});
  CHECK(expand_interactions(std::vector<double>(5, 0.0), InteractionScheme::all_pairs(5)).isZero());
  const std::vector<FeaturePair> keep{{0, 2}};
  CHECK(to_std(expand_interactions(x, InteractionScheme::from_pairs(3, keep))) == std::vector<double>{3});
  CHECK_THROWS_AS(expand_interactions(std::vector<double>{1, 2}, InteractionScheme::all_pairs(3)),
                  DimensionError);

  std::mt19937_64 gen(1);
  const auto scheme = InteractionScheme::all_pairs(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x7 = to_std(testing::random_vector(gen, 7));
    const Vector out = expand_interactions(x7, scheme);
    std::size_t f = 0;
    for (std::size_t j = 0; j < 7; ++j)
      for (std::size_t k = j + 1; k < 7; ++k) CHECK(out[static_cast<Eigen::Index>(f++)] == x7[j] * x7[k]);
  }
}

TEST_CASE("linear_score hand example and zero parameters") {
  const auto scheme = InteractionScheme::all_pairs(3);
  ModelParams params;
  params.beta0 = 1.0;
  params.beta = Vector::Map(std::vector<double>{1, -1, 0}.data(), 3);
  params.theta = Vector::Zero(3);
  params.theta[0] = 0.5;
  CHECK(linear_score(params, std::vector<double>{2, 3, 1}, scheme) == doctest::Approx(3.0));

  params.has_intercept = false;
  CHECK(linear_score(params, std::vector<double>{2, 3, 1}, scheme) == doctest::Approx(2.0));

  ModelParams zero;
  zero.beta = Vector::Zero(3);
  zero.theta = Vector::Zero(3);
  CHECK(linear_score(zero, std::vector<double>{5, -2, 9}, scheme) == 0.0);

  params.beta[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(linear_score(params, std::vector<double>{2, 3, 1}, scheme), NumericError);
}

TEST_CASE("linear_score agrees with the double-loop oracle and is linear in params") {
  std::mt19937_64 gen(2);
  std::vector<std::uint8_t> mask(InteractionScheme::pair_count(6), 1);
  mask[2] = mask[9] = 0;
  for (const auto& scheme : {InteractionScheme::all_pairs(6), InteractionScheme::from_mask(6, mask)}) {
    for (int rep = 0; rep < 20; ++rep) {
      ModelParams params;
      params.beta0 = testing::random_vector(gen, 1)[0];
      params.beta = testing::random_vector(gen, 6);
      params.theta = testing::random_vector(gen, static_cast<Eigen::Index>(scheme.size()));
      const auto x = to_std(testing::random_vector(gen, 6));
      const double s = linear_score(params, x, scheme);
      CHECK(s == doctest::Approx(brute_score(params, x, scheme)).epsilon(1e-12));

      ModelParams scaled = params;
      scaled.beta0 *= 2.5;
      scaled.beta *= 2.5;
      scaled.theta *= 2.5;
      CHECK(linear_score(scaled, x, scheme) == doctest::Approx(2.5 * s).epsilon(1e-12));
    }
  }
}

TEST_CASE("batch scores match per-row scores") {
  std::mt19937_64 gen(3);
  const auto scheme = InteractionScheme::all_pairs(5);
  ModelParams params;
  params.beta0 = 0.3;
  params.beta = testing::random_vector(gen, 5);
  params.theta = testing::random_vector(gen, 10);
  const Matrix X = testing::random_matrix(gen, 12, 5);
  const Vector batch = linear_scores(params, X, scheme);
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const std::vector<double> row(X.row(i).data(), X.row(i).data() + 5);
    CHECK(batch[i] == doctest::Approx(linear_score(params, row, scheme)).epsilon(1e-12));
  }
}

TEST_CASE("reconstruct_theta examples") {
  const auto scheme = InteractionScheme::all_pairs(3);
  Matrix Z(3, 2);
  Z << 1, 0, 0, 1, 1, 1;
  CHECK(to_std(reconstruct_theta(Z, 0.0, LvmKind::low_rank, scheme)) == std::vector<double>{0, 1, 1});

  Matrix same(2, 2);
  same << 0.3, -1.0, 0.3, -1.0;
  CHECK(reconstruct_theta(same, 0.5, LvmKind::latent_distance, InteractionScheme::all_pairs(2))[0] == 0.5);

  Matrix apart(2, 2);
  apart << 0, 0, 1, 1;
  CHECK(reconstruct_theta(apart, 0.0, LvmKind::latent_distance, InteractionScheme::all_pairs(2))[0] == -2.0);

  const std::vector<FeaturePair> keep{{0, 2}, {1, 2}};
  CHECK(to_std(reconstruct_theta(Z, 0.0, LvmKind::low_rank, InteractionScheme::from_pairs(3, keep))) ==
        std::vector<double>{1, 1});
}

TEST_CASE("low-rank reconstruction has rank at most d") {
  std::mt19937_64 gen(4);
  for (std::size_t d : {1, 2, 3}) {
    const std::size_t p = 8;
    const auto scheme = InteractionScheme::all_pairs(p);
    const Matrix Z = testing::random_matrix(gen, p, static_cast<Eigen::Index>(d));
    Matrix full = symmetric_theta(reconstruct_theta(Z, 0.0, LvmKind::low_rank, scheme), scheme);
    full.diagonal() = Z.rowwise().squaredNorm();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(full);
    const auto& sv = svd.singularValues();
    for (Eigen::Index i = static_cast<Eigen::Index>(d); i < sv.size(); ++i) CHECK(sv[i] < 1e-8 * sv[0]);
  }
}

TEST_CASE("flatten and unflatten") {
  const auto scheme = InteractionScheme::all_pairs(3);
  Matrix theta = Matrix::Zero(3, 3);
  theta(0, 1) = 1.5;
  theta(0, 2) = -2.0;
  theta(1, 2) = 7.0;
  CHECK(to_std(flatten_theta(theta, scheme)) == std::vector<double>{1.5, -2.0, 7.0});

  const std::vector<FeaturePair> keep{{0, 2}, {1, 2}};
  const auto masked = InteractionScheme::from_pairs(3, keep);
  const Matrix back = unflatten_theta(Vector::Map(std::vector<double>{-2.0, 7.0}.data(), 2), masked);
  CHECK(back(0, 1) == 0.0);
  CHECK(back(0, 2) == -2.0);
  CHECK(back(1, 2) == 7.0);
  CHECK_THROWS_AS(unflatten_theta(Vector::Zero(3), masked), DimensionError);

  std::mt19937_64 gen(5);
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t p = 2 + static_cast<std::size_t>(rep % 9);
    const auto s = InteractionScheme::all_pairs(p);
    Matrix upper = testing::random_matrix(gen, static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    upper = upper.triangularView<Eigen::StrictlyUpper>().toDenseMatrix();
    CHECK(unflatten_theta(flatten_theta(upper, s), s) == upper);
  }
}

TEST_CASE("masks and bipartite schemes") {
  const std::vector<std::size_t> a{0, 1};
  const std::vector<std::size_t> b{3, 4};
  const auto s = InteractionScheme::bipartite(5, a, b);
  const std::vector<FeaturePair> expected{{0, 3}, {0, 4}, {1, 3}, {1, 4}};
  CHECK(s.pairs() == expected);
  CHECK_FALSE(s.flat_index(0, 1).has_value());
  CHECK(s.lex_indices() == std::vector<std::size_t>{2, 3, 5, 6});
  CHECK(InteractionScheme::from_mask(5, s.mask()) == s);
  CHECK_THROWS(InteractionScheme::from_mask(5, std::vector<std::uint8_t>(3, 1)));
}

TEST_CASE("params validation") {
  const auto scheme = InteractionScheme::all_pairs(3);
  ModelParams params;
  params.beta = Vector::Zero(3);
  params.theta = Vector::Zero(3);
  CHECK_NOTHROW(params.validate(scheme));
  params.lvm_kind = LvmKind::low_rank;
  params.Z = Matrix::Zero(3, 3);
  CHECK_THROWS_AS(params.validate(scheme), DimensionError);
  params.Z = Matrix::Zero(3, 2);
  CHECK_NOTHROW(params.validate(scheme));
  params.theta = Vector::Zero(2);
  CHECK_THROWS_AS(params.validate(scheme), DimensionError);
}

TEST_CASE("dataset validation") {
  Dataset d;
  d.task = TaskKind::survival;
  d.X = Matrix::Zero(3, 2);
  d.feature_names = {"a", "b"};
  d.time = Vector::Ones(3);
  d.event = Vector::Ones(3);
  CHECK_NOTHROW(d.validate());
  d.time[1] = 0.0;
  CHECK_THROWS_AS(d.validate(), DataError);
  d.time[1] = 1.0;
  d.event[2] = 0.5;
  CHECK_THROWS_AS(d.validate(), DataError);
  d.event[2] = 0.0;
  d.X(0, 0) = std::nan("");
  CHECK_THROWS_AS(d.validate(), DataError);

  Dataset c;
  c.task = TaskKind::classification;
  c.X = Matrix::Zero(2, 1);
  c.feature_names = {"a"};
  c.y = Vector::Map(std::vector<double>{0, 2}.data(), 2);
  CHECK_THROWS_AS(c.validate(), DataError);
}

TEST_CASE("standardizer uses training statistics and leaves constants alone") {
  Matrix X(4, 2);
  X << 1, 5, 2, 5, 3, 5, 4, 5;
  const auto st = Standardizer::fit(X);
  const Matrix Y = st.apply(X);
  CHECK(Y.col(0).mean() == doctest::Approx(0.0));
  CHECK(std::sqrt(Y.col(0).squaredNorm() / 3.0) == doctest::Approx(1.0));
  CHECK(Y.col(1).isZero());
}
