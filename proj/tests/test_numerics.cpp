#include <doctest.h>

#include <cmath>
#include <vector>

#include "osmcaa/errors.hpp"
#include "osmcaa/matrix.hpp"
#include "osmcaa/numerics.hpp"
#include "osmcaa/rng.hpp"

using namespace osmcaa;

namespace {

Matrix random_unit_rows(std::size_t m, std::size_t d, Rng& rng) {
  Matrix x(m, d);
  for (double& v : x.values()) v = rng.next_normal();
  return l2_normalize_rows(x);
}

}  // namespace

TEST_CASE("l2_normalize_rows on known rows") {
  const Matrix x = Matrix::from_rows({{3.0, 4.0}});
  const Matrix n = l2_normalize_rows(x);
  CHECK(n(0, 0) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(n(0, 1) == doctest::Approx(0.8).epsilon(1e-15));

  const Matrix e1 = Matrix::from_rows({{1.0, 0.0, 0.0}});
  const Matrix ne1 = l2_normalize_rows(e1);
  CHECK(ne1(0, 0) == 1.0);
  CHECK(ne1(0, 1) == 0.0);
  CHECK(ne1(0, 2) == 0.0);

  const Matrix ones = l2_normalize_rows(Matrix::from_rows({{1.0, 1.0, 1.0, 1.0}}));
  for (int j = 0; j < 4; ++j)
    CHECK(ones(0, static_cast<std::size_t>(j)) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("l2_normalize_rows rejects a zero row and is idempotent") {
  Matrix x = Matrix::from_rows({{1.0, 2.0}, {0.0, 0.0}});
  CHECK_THROWS_AS(l2_normalize_rows(x), ZeroNormRowError);

  Rng rng(17);
  Matrix y(8, 5);
  for (double& v : y.values()) v = rng.next_normal() * 3.0;
  const Matrix once = l2_normalize_rows(y);
  const Matrix twice = l2_normalize_rows(once);
  for (std::size_t i = 0; i < once.rows(); ++i) {
    CHECK(std::abs(std::sqrt(squared_norm(once.row(i))) - 1.0) < 1e-12);
    for (std::size_t j = 0; j < once.cols(); ++j)
      CHECK(std::abs(once(i, j) - twice(i, j)) < 1e-12);
  }
}

TEST_CASE("pairwise_distances on known rows") {
  const Matrix ortho = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  const DistanceMatrix d1 = pairwise_distances(ortho);
  CHECK(d1(0, 1) == doctest::Approx(1.4142135623730951).epsilon(1e-14));
  CHECK(d1(0, 0) == 0.0);
  CHECK(d1(1, 0) == d1(0, 1));

  const Matrix same = Matrix::from_rows({{0.3, -0.7}, {0.3, -0.7}});
  CHECK(pairwise_distances(same)(0, 1) == 0.0);

  const Matrix triangle = Matrix::from_rows({{0.0, 0.0}, {3.0, 4.0}});
  CHECK(pairwise_distances(triangle)(0, 1) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("pairwise_distances rejects non-finite input") {
  Matrix x = Matrix::from_rows({{1.0, 0.0}, {0.0, 1.0}});
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(pairwise_distances(x), NonFiniteEvaluationError);
}

TEST_CASE("pairwise_distances: triangle inequality on random unit batches") {
  Rng rng(101);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 3 + rng.next_index(30);  // up to 32
    const Matrix f = random_unit_rows(m, 6, rng);
    const DistanceMatrix d = pairwise_distances(f);
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        CHECK(d(i, j) >= 0.0);
        CHECK(d(i, j) <= 2.0 + 1e-12);
        for (std::size_t k = 0; k < m; ++k)
          CHECK(d(i, j) <= d(i, k) + d(k, j) + 1e-9);
      }
    }
  }
}

TEST_CASE("finite_diff_grad on known functions") {
  const auto square = [](const Matrix& x) { return x(0, 0) * x(0, 0); };
  const Matrix at3 = Matrix::from_rows({{3.0}});
  CHECK(finite_diff_grad(square, at3, 1e-5)(0, 0) == doctest::Approx(6.0).epsilon(1e-8));

  const auto constant = [](const Matrix&) { return 4.2; };
  const Matrix g0 = finite_diff_grad(constant, Matrix::from_rows({{1.0, 2.0, 3.0}}), 1e-5);
  for (std::size_t j = 0; j < 3; ++j) CHECK(g0(0, j) == 0.0);

  const auto sqnorm = [](const Matrix& x) { return squared_norm(x.row(0)); };
  const Matrix g = finite_diff_grad(sqnorm, Matrix::from_rows({{1.0, 2.0}}), 1e-5);
  CHECK(g(0, 0) == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(g(0, 1) == doctest::Approx(4.0).epsilon(1e-7));
}

TEST_CASE("finite_diff_grad flags non-finite evaluations") {
  const auto bad = [](const Matrix& x) { return std::log(x(0, 0)); };
  CHECK_THROWS_AS(finite_diff_grad(bad, Matrix::from_rows({{0.0}}), 1e-5),
                  NonFiniteEvaluationError);
}

TEST_CASE("relative_error guards small magnitudes") {
  CHECK(relative_error(0.0, 0.0) == 0.0);
  CHECK(relative_error(1e-9, 0.0) == doctest::Approx(1e-9));
  CHECK(relative_error(200.0, 100.0) == doctest::Approx(0.5));
}
