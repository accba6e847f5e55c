#include <doctest.h>

#include <cmath>
#include <random>

#include "badge/embedding.hpp"
#include "badge/errors.hpp"
#include "support/test_support.hpp"

using namespace badge;

TEST_CASE("hypothetical_label picks the argmax with lowest-index ties") {
  CHECK(hypothetical_label(std::vector{0.2, 0.5, 0.3}) == 1);
  CHECK(hypothetical_label(std::vector{0.5, 0.5}) == 0);
  CHECK(hypothetical_label(std::vector{1.0, 0.0, 0.0}) == 0);
  CHECK_THROWS_AS(hypothetical_label(std::vector<double>{}), InvalidInput);
  CHECK_THROWS_AS(hypothetical_label(std::vector<double>{0.5, NAN}), InvalidInput);
}

TEST_CASE("gradient_embedding evaluates the per-class blocks") {
  const PredictionRecord rec{{0.9, 0.1}, {1.0, 2.0}, 7};
  const auto g = gradient_embedding(rec, 2, 2);
  REQUIRE(g.size() == 4);
  CHECK(g.block(0)[0] == doctest::Approx(-0.1).epsilon(1e-14));
  CHECK(g.block(0)[1] == doctest::Approx(-0.2).epsilon(1e-14));
  CHECK(g.block(1)[0] == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(g.block(1)[1] == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(g.norm_sq() == doctest::Approx(0.1).epsilon(1e-12));

  SUBCASE("one-hot probabilities give the zero vector") {
    const auto zero = gradient_embedding(PredictionRecord{{0.0, 1.0, 0.0}, {3.0, -4.0}, 0});
    for (const double v : zero.values()) {
      CHECK(v == 0.0);
    }
    CHECK(zero.norm_sq() == 0.0);
  }
  SUBCASE("zero features give the zero vector") {
    const auto zero = gradient_embedding(PredictionRecord{{0.3, 0.7}, {0.0, 0.0, 0.0}, 0});
    CHECK(zero.norm_sq() == 0.0);
  }
  SUBCASE("dimension mismatch is rejected") {
    CHECK_THROWS_AS(gradient_embedding(rec, 3, 2), InvalidInput);
    CHECK_THROWS_AS(gradient_embedding(rec, 2, 5), InvalidInput);
  }
  SUBCASE("invalid records are rejected") {
    CHECK_THROWS_AS(gradient_embedding(PredictionRecord{{0.6, 0.6}, {1.0}, 0}), InvalidInput);
    CHECK_THROWS_AS(gradient_embedding(PredictionRecord{{1.2, -0.2}, {1.0}, 0}), InvalidInput);
    CHECK_THROWS_AS(gradient_embedding(PredictionRecord{{0.5, 0.5}, {INFINITY}, 0}), InvalidInput);
  }
}

TEST_CASE("grad_norm_sq_for_label closed form") {
  CHECK(grad_norm_sq_for_label(std::vector{1.0, 0.0}, 0, 1.0) == 0.0);
  CHECK(grad_norm_sq_for_label(std::vector{1.0, 0.0}, 1, 1.0) == doctest::Approx(2.0));
  CHECK(grad_norm_sq_for_label(std::vector{0.5, 0.5}, 0, 4.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(grad_norm_sq_for_label(std::vector{0.5, 0.5}, 2, 1.0), InvalidInput);
}

TEST_CASE("norm identity, argmin and lower bound over random predictions") {
  std::mt19937_64 gen(20240501);
  std::uniform_int_distribution<std::size_t> k_dist(2, 10);
  std::uniform_int_distribution<std::size_t> d_dist(1, 32);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = k_dist(gen);
    const std::size_t d = d_dist(gen);
    const double scale = 0.1 + 0.01 * trial;
    PredictionRecord rec{testing::random_probs(gen, k, scale), testing::random_vector(gen, d), 0};
    const auto g = gradient_embedding(rec);
    double z_sq = 0.0;
    for (const double z : rec.features) {
      z_sq += z * z;
    }
    const std::size_t yhat = hypothetical_label(rec.probs);
    const double closed = grad_norm_sq_for_label(rec.probs, yhat, z_sq);
    CHECK(std::abs(g.norm_sq() - closed) <= 1e-10 * std::max(closed, 1e-300));
    for (std::size_t y = 0; y < k; ++y) {
      CHECK(closed <= grad_norm_sq_for_label(rec.probs, y, z_sq) * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("scaling features scales the embedding") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 50; ++trial) {
    PredictionRecord rec{testing::random_probs(gen, 4, 1.0), testing::random_vector(gen, 6), 0};
    const double c = 0.25 * (trial + 1);
    PredictionRecord scaled = rec;
    for (auto& z : scaled.features) {
      z *= c;
    }
    const auto g = gradient_embedding(rec);
    const auto gs = gradient_embedding(scaled);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(gs.values()[i] == doctest::Approx(c * g.values()[i]).epsilon(1e-14));
    }
    CHECK(gs.norm_sq() == doctest::Approx(c * c * g.norm_sq()).epsilon(1e-12));
  }
}

TEST_CASE("embedding_matrix rows equal individual embeddings") {
  std::mt19937_64 gen(11);
  std::vector<PredictionRecord> recs;
  for (std::size_t i = 0; i < 20; ++i) {
    recs.push_back({testing::random_probs(gen, 3, 2.0), testing::random_vector(gen, 5), i});
  }
  const Matrix m = embedding_matrix(recs);
  REQUIRE(m.rows() == 20);
  REQUIRE(m.cols() == 15);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto g = gradient_embedding(recs[i]);
    for (std::size_t j = 0; j < g.size(); ++j) {
      CHECK(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == g.values()[j]);
    }
  }
}

TEST_CASE("binary logistic gradients on the decision boundary differ only by sign") {
  // Integer data keeps w.x exactly zero after the (scaled) projection.
  std::mt19937_64 gen(99);
  std::uniform_int_distribution<int> coord(-9, 9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> w(5), x(5);
    for (auto& v : w) v = coord(gen);
    w[0] = 1.0 + std::abs(w[0]);
    for (auto& v : x) v = coord(gen);
    double wx = 0.0, ww = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      wx += w[i] * x[i];
      ww += w[i] * w[i];
    }
    for (std::size_t i = 0; i < 5; ++i) {
      x[i] = ww * x[i] - wx * w[i];
    }
    const int yhat = binary_hallucinated_label(w, x);
    CHECK(yhat == -1);
    const auto ghat = binary_logistic_gradient(w, x, yhat);
    for (const int y : {-1, 1}) {
      const auto g = binary_logistic_gradient(w, x, y);
      for (std::size_t i = 0; i < 5; ++i) {
        CHECK(std::abs(ghat[i]) == std::abs(g[i]));
        CHECK(ghat[i] == static_cast<double>(y * yhat) * g[i]);
      }
    }
  }
  CHECK_THROWS_AS(binary_logistic_gradient(std::vector{1.0}, std::vector{1.0}, 0), InvalidInput);
}
