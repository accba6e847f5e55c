#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "badge/diagnostics.hpp"
#include "badge/errors.hpp"
#include "badge/linalg.hpp"
#include "support/test_support.hpp"

using namespace badge;

TEST_CASE("cholesky_log_det agrees with an LU determinant") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 12);
    const Matrix x = testing::random_matrix(gen, n, n + 3);
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const double expected = std::log(testing::gram_det_lu(x, rows));
    CHECK(cholesky_log_det(gram_of_rows(x, rows)) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("cholesky_log_det flags singular and indefinite matrices") {
  Matrix rank_one(2, 2);
  rank_one << 2.0, 2.0, 2.0, 2.0;
  CHECK(cholesky_log_det(rank_one) == -INFINITY);
  Matrix zero = Matrix::Zero(3, 3);
  CHECK(cholesky_log_det(zero) == -INFINITY);
  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK(cholesky_log_det(indefinite) == -INFINITY);
  CHECK_THROWS_AS(cholesky_log_det(Matrix(2, 3)), InvalidInput);
}

TEST_CASE("log_gram_det examples") {
  Matrix unit(1, 3);
  unit << 0.0, 1.0, 0.0;
  CHECK(log_gram_det(unit) == doctest::Approx(0.0));

  Matrix twins(2, 3);
  twins << 0.3, -1.7, 2.2, 0.3, -1.7, 2.2;
  CHECK(log_gram_det(twins) == -INFINITY);

  Matrix orth(2, 3);
  orth << 2.0, 0.0, 0.0, 0.0, 3.0, 0.0;
  CHECK(log_gram_det(orth) == doctest::Approx(std::log(36.0)));

  CHECK_THROWS_AS(log_gram_det(Matrix(0, 3)), InvalidInput);
}

TEST_CASE("mean_embedding_norm examples") {
  CHECK(mean_embedding_norm(Matrix::Zero(4, 5)) == 0.0);
  Matrix two(2, 2);
  two << 1.0, 0.0, 0.0, 3.0;
  CHECK(mean_embedding_norm(two) == doctest::Approx(2.0));

  std::mt19937_64 gen(8);
  Matrix units = testing::random_matrix(gen, 100, 7);
  for (Eigen::Index r = 0; r < units.rows(); ++r) {
    units.row(r) /= units.row(r).norm();
  }
  CHECK(std::abs(mean_embedding_norm(units) - 1.0) <= 1e-12);
}

TEST_CASE("log_gram_det is permutation invariant and shifts by 2B ln c under scaling") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t b = 2 + static_cast<std::size_t>(trial % 6);
    const Matrix x = testing::random_matrix(gen, b, 10);
    const double base = log_gram_det(x);

    std::vector<std::size_t> perm(b);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), gen);
    const auto diag = batch_diagnostics(x, perm);
    CHECK(diag.log_gram_det == doctest::Approx(base).epsilon(1e-10));
    CHECK(diag.batch_size == b);

    const double c = 0.5 + trial;
    const Matrix scaled = c * x;
    CHECK(log_gram_det(scaled) ==
          doctest::Approx(base + 2.0 * static_cast<double>(b) * std::log(c)).epsilon(1e-10));
    CHECK(mean_embedding_norm(scaled) == doctest::Approx(c * mean_embedding_norm(x)));
  }
}
