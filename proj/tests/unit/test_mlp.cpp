#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "badge/embedding.hpp"
#include "badge/errors.hpp"
#include "badge/mlp.hpp"
#include "support/test_support.hpp"

using namespace badge;

namespace {

MlpConfig small_config(std::size_t d, std::size_t h, std::size_t k, std::uint64_t seed) {
  MlpConfig cfg;
  cfg.input_dim = d;
  cfg.hidden_dim = h;
  cfg.num_classes = k;
  cfg.rng_seed = seed;
  return cfg;
}

MlpParams zero_params(const MlpConfig& cfg) {
  MlpParams p;
  p.weights = MlpTensors::zeros(cfg);
  p.adam_m = MlpTensors::zeros(cfg);
  p.adam_v = MlpTensors::zeros(cfg);
  return p;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(small_config(3, 4, 2, 0).validate());
  CHECK_THROWS_AS(small_config(0, 4, 2, 0).validate(), InvalidInput);
  CHECK_THROWS_AS(small_config(3, 0, 2, 0).validate(), InvalidInput);
  CHECK_THROWS_AS(small_config(3, 4, 0, 0).validate(), InvalidInput);
  auto bad = small_config(3, 4, 2, 0);
  bad.train_acc_threshold = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad.train_acc_threshold = 1.5;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("init_params is uniform within the fan-in bound and seeded") {
  const auto cfg = small_config(16, 32, 5, 7);
  const auto a = init_params(cfg);
  const auto b = init_params(cfg);
  CHECK(a.weights.flatten() == b.weights.flatten());
  CHECK(a.weights.w1.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(16.0));
  CHECK(a.weights.b1.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(16.0));
  CHECK(a.weights.w2.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(32.0));
  CHECK(a.weights.b2.cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(32.0));
  CHECK(a.weights.parameter_count() == 32 * 16 + 32 + 5 * 32 + 5);
  auto other = cfg;
  other.rng_seed = 8;
  CHECK(init_params(other).weights.flatten() != a.weights.flatten());
}

TEST_CASE("forward examples") {
  const auto cfg = small_config(3, 4, 5, 0);
  const auto zero = zero_params(cfg);
  const auto out = forward(zero, std::vector{1.0, -2.0, 3.0});
  for (const double p : out.probs) {
    CHECK(p == doctest::Approx(0.2));
  }
  for (const double z : out.features) {
    CHECK(z == 0.0);
  }

  Matrix logits(1, 2);
  logits << std::log(3.0), 0.0;
  const Matrix p = softmax_rows(logits);
  CHECK(p(0, 0) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(p(0, 1) == doctest::Approx(0.25).epsilon(1e-15));

  Matrix huge(1, 3);
  huge << 1000.0, 999.0, -1000.0;
  const Matrix q = softmax_rows(huge);
  CHECK(std::isfinite(q(0, 0)));
  CHECK(q.sum() == doctest::Approx(1.0));

  CHECK_THROWS_AS(forward(zero, std::vector<double>{1.0, NAN, 0.0}), InvalidInput);
  CHECK_THROWS_AS(forward(zero, std::vector{1.0, 0.0}), InvalidInput);
}

TEST_CASE("softmax outputs stay in (0,1) and normalized for random params") {
  std::mt19937_64 gen(12);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto params = init_params(small_config(6, 10, 4, s));
    const Matrix x = testing::random_matrix(gen, 30, 6);
    const auto out = forward_batch(params, x);
    for (Eigen::Index r = 0; r < out.probs.rows(); ++r) {
      CHECK(std::abs(out.probs.row(r).sum() - 1.0) <= 1e-9);
      CHECK(out.probs.row(r).minCoeff() > 0.0);
      CHECK(out.probs.row(r).maxCoeff() < 1.0);
      const auto single = forward(params, std::vector<double>(x.row(r).begin(), x.row(r).end()));
      for (std::size_t c = 0; c < single.probs.size(); ++c) {
        CHECK(single.probs[c] == doctest::Approx(out.probs(r, static_cast<Eigen::Index>(c))).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("loss of a uniform predictor is ln K") {
  const auto cfg = small_config(2, 3, 4, 0);
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  const std::vector<std::size_t> y{0, 3, 1};
  CHECK(loss_and_grad(zero_params(cfg), x, y).loss == doctest::Approx(std::log(4.0)));
  CHECK_THROWS_AS(loss_and_grad(zero_params(cfg), x, std::vector<std::size_t>{0, 4, 1}), InvalidInput);
}

TEST_CASE("loss clamps a zero true-class probability") {
  auto cfg = small_config(1, 1, 2, 0);
  auto p = zero_params(cfg);
  p.weights.w1(0, 0) = 1.0;
  p.weights.w2(0, 0) = 2000.0;
  Matrix x(1, 1);
  x << 1.0;
  const auto lg = loss_and_grad(p, x, std::vector<std::size_t>{1});
  CHECK(lg.loss == doctest::Approx(-std::log(1e-12)));
  CHECK(std::isfinite(lg.grad.w2(0, 0)));
}

TEST_CASE("output-layer gradient equals the embedding formula with the true label") {
  std::mt19937_64 gen(77);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto params = init_params(small_config(5, 7, 3, s));
    const Matrix x = testing::random_matrix(gen, 1, 5);
    const std::size_t y = s % 3;
    const auto lg = loss_and_grad(params, x, std::vector<std::size_t>{y});
    const auto fw = forward_batch(params, x);
    const std::vector<double> probs(fw.probs.row(0).begin(), fw.probs.row(0).end());
    const std::vector<double> z(fw.features.row(0).begin(), fw.features.row(0).end());
    std::vector<double> expected(3 * 7);
    output_gradient_into(probs, y, z, expected);
    for (Eigen::Index i = 0; i < 3; ++i) {
      for (Eigen::Index j = 0; j < 7; ++j) {
        CHECK(lg.grad.w2(i, j) == expected[static_cast<std::size_t>(i * 7 + j)]);
      }
    }
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  // Relative error per entry, |a - n| / max(|a|, |n|, 1e-3); the floor keeps
  // entries that are numerically zero from dominating.
  constexpr double kStep = 1e-5;
  constexpr double kTol = 1e-6;
  std::mt19937_64 gen(2024);
  std::uniform_int_distribution<std::size_t> dim(1, 8);
  std::uniform_int_distribution<std::size_t> cls(2, 4);
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 25; ++trial) {
    const auto cfg = small_config(dim(gen), dim(gen), cls(gen), trial);
    auto params = init_params(cfg);
    const std::size_t n = 1 + trial % 5;
    const Matrix x = testing::random_matrix(gen, n, cfg.input_dim);
    std::vector<std::size_t> y(n);
    for (auto& label : y) {
      label = std::uniform_int_distribution<std::size_t>(0, cfg.num_classes - 1)(gen);
    }
    const auto analytic = loss_and_grad(params, x, y).grad.flatten();
    auto flat = params.weights.flatten();
    for (std::size_t i = 0; i < flat.size(); ++i) {
      const double saved = flat[i];
      flat[i] = saved + kStep;
      params.weights.assign(flat);
      const double up = loss_and_grad(params, x, y).loss;
      flat[i] = saved - kStep;
      params.weights.assign(flat);
      const double down = loss_and_grad(params, x, y).loss;
      flat[i] = saved;
      params.weights.assign(flat);
      const double numeric = (up - down) / (2.0 * kStep);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-3});
      worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
  }
  INFO("worst relative error " << worst);
  CHECK(worst <= kTol);
}

TEST_CASE("adam keeps parameters finite and moves against the gradient") {
  const auto cfg = small_config(4, 6, 3, 1);
  auto params = init_params(cfg);
  std::mt19937_64 gen(3);
  const Matrix x = testing::random_matrix(gen, 10, 4);
  const std::vector<std::size_t> y{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  const double before = loss_and_grad(params, x, y).loss;
  for (int step = 0; step < 50; ++step) {
    adam_step(params, loss_and_grad(params, x, y).grad, cfg);
    for (const double v : params.weights.flatten()) {
      REQUIRE(std::isfinite(v));
    }
  }
  CHECK(params.adam_step == 50);
  CHECK(loss_and_grad(params, x, y).loss < before);
}

TEST_CASE("train_from_scratch reaches the threshold on separable data") {
  std::mt19937_64 gen(9);
  Matrix x(20, 2);
  std::vector<std::size_t> y(20);
  for (Eigen::Index i = 0; i < 20; ++i) {
    const std::size_t c = static_cast<std::size_t>(i % 2);
    x(i, 0) = (c == 0 ? -2.0 : 2.0) + 0.3 * std::normal_distribution<double>()(gen);
    x(i, 1) = std::normal_distribution<double>()(gen);
    y[static_cast<std::size_t>(i)] = c;
  }
  auto cfg = small_config(2, 16, 2, 5);
  cfg.train_acc_threshold = 1.0;
  const auto a = train_from_scratch(cfg, x, y);
  CHECK(a.stop == StopReason::reached_threshold);
  CHECK(a.epochs < cfg.max_epochs);
  CHECK(a.train_accuracy == 1.0);
  CHECK(test_accuracy(a.params, x, y) == 1.0);

  const auto b = train_from_scratch(cfg, x, y);
  CHECK(a.params.weights.flatten() == b.params.weights.flatten());
  CHECK(a.epochs == b.epochs);
}

TEST_CASE("train_from_scratch on one example and on a single class") {
  auto cfg = small_config(3, 8, 3, 2);
  Matrix one(1, 3);
  one << 0.5, -1.0, 2.0;
  const auto r = train_from_scratch(cfg, one, std::vector<std::size_t>{2});
  CHECK(r.train_accuracy == 1.0);
  CHECK(r.stop == StopReason::reached_threshold);

  std::mt19937_64 gen(4);
  const Matrix x = testing::random_matrix(gen, 15, 3);
  const auto single = train_from_scratch(cfg, x, std::vector<std::size_t>(15, 1));
  CHECK(single.train_accuracy == 1.0);
  CHECK_THROWS_AS(train_from_scratch(cfg, Matrix(0, 3), std::vector<std::size_t>{}), InvalidInput);
}

TEST_CASE("train_from_scratch stops at the epoch cap on unlearnable labels") {
  Matrix x = Matrix::Ones(8, 2);
  const std::vector<std::size_t> y{0, 1, 0, 1, 0, 1, 0, 1};
  auto cfg = small_config(2, 4, 2, 0);
  cfg.max_epochs = 5;
  const auto r = train_from_scratch(cfg, x, y);
  CHECK(r.stop == StopReason::max_epochs);
  CHECK(r.epochs == 5);
  CHECK(r.train_accuracy == doctest::Approx(0.5));
}

TEST_CASE("predictions and accuracy") {
  const auto cfg = small_config(2, 3, 2, 0);
  const auto zero = zero_params(cfg);
  Matrix x(4, 2);
  x << 1, 0, 0, 1, -1, 0, 0, -1;
  const std::vector<std::size_t> y{0, 1, 0, 1};
  CHECK(predict_labels(zero, x) == std::vector<std::size_t>{0, 0, 0, 0});
  CHECK(test_accuracy(zero, x, y) == 0.5);
  CHECK_THROWS_AS(test_accuracy(zero, Matrix(0, 2), std::vector<std::size_t>{}), InvalidInput);

  const std::vector<std::size_t> ids{10, 11, 12, 13};
  const auto recs = predict_pool(zero, x, ids);
  REQUIRE(recs.size() == 4);
  CHECK(recs[2].example_id == 12);
  CHECK(recs[2].probs == std::vector{0.5, 0.5});
  CHECK(recs[2].features.size() == 3);
}

TEST_CASE("checkpoint round trip") {
  const auto params = init_params(small_config(5, 6, 3, 42));
  const auto path = std::filesystem::temp_directory_path() / "badge_test_ckpt.bin";
  save_checkpoint(path, params, 42);
  CHECK(std::filesystem::file_size(path) == 8 + 4 * 4 + 8 + 8 + 8 * params.weights.parameter_count());
  const auto back = load_checkpoint(path);
  CHECK(back.rng_seed == 42);
  CHECK(back.params.weights.flatten() == params.weights.flatten());
  CHECK(back.params.hidden_dim() == 6);

  {
    std::ofstream bad(path, std::ios::binary);
    bad << "NOTAMLPxxxxxxxxxxxxxxxxxxxx";
  }
  CHECK_THROWS(load_checkpoint(path));
  std::filesystem::remove(path);
}
