#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "badge/al_loop.hpp"
#include "badge/diagnostics.hpp"
#include "badge/errors.hpp"
#include "badge/random.hpp"

using namespace badge;

namespace {

ExperimentConfig small_experiment(SelectorKind kind) {
  ExperimentConfig cfg;
  cfg.dataset_name = "mixture";
  cfg.selector.kind = kind;
  cfg.initial_labels = 20;
  cfg.batch_size = 10;
  cfg.rounds = 3;
  cfg.repetitions = 2;
  cfg.seed = 13;
  cfg.model.hidden_dim = 16;
  cfg.model.max_epochs = 40;
  return cfg;
}

const Dataset& mixture() {
  static const Dataset ds = synth_gaussian_mixture(3, 6, 250, 2.0, 1);
  return ds;
}

bool same_logs(const RepetitionResult& a, const RepetitionResult& b) {
  if (a.rounds.size() != b.rounds.size() || a.labeled_ids != b.labeled_ids) {
    return false;
  }
  for (std::size_t i = 0; i < a.rounds.size(); ++i) {
    const auto& x = a.rounds[i];
    const auto& y = b.rounds[i];
    const auto eq = [](double u, double v) { return u == v || (std::isnan(u) && std::isnan(v)); };
    if (x.labels != y.labels || x.test_accuracy != y.test_accuracy ||
        !eq(x.log_gram_det, y.log_gram_det) || !eq(x.mean_norm, y.mean_norm) ||
        x.metadata != y.metadata) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("selector names round trip") {
  for (const auto kind : {SelectorKind::random, SelectorKind::confidence, SelectorKind::margin,
                          SelectorKind::entropy, SelectorKind::coreset, SelectorKind::badge,
                          SelectorKind::badge_kdpp, SelectorKind::albl}) {
    CHECK(parse_selector(to_string(kind)) == kind);
  }
  CHECK(parse_selector("conf") == SelectorKind::confidence);
  CHECK(parse_selector("rand") == SelectorKind::random);
  CHECK_THROWS_AS(parse_selector("nope"), InvalidInput);
}

TEST_CASE("bandit with full exploration is uniform") {
  AlblBandit bandit(0.3, 1.0);
  bandit.update(AlblArm::coreset, 1.0, 0.5);
  bandit.update(AlblArm::coreset, 1.0, 0.5);
  const auto p = bandit.probabilities();
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
}

TEST_CASE("bandit favors the rewarding arm") {
  double total_freq = 0.0;
  constexpr int kRuns = 200;
  for (int run = 0; run < kRuns; ++run) {
    AlblBandit bandit(0.3, 0.1);
    Rng rng(static_cast<std::uint64_t>(run));
    int good = 0;
    for (int round = 0; round < 50; ++round) {
      const auto p = bandit.probabilities();
      const auto arm = bandit.draw(rng);
      const double reward = arm == AlblArm::confidence ? 1.0 : 0.0;
      good += arm == AlblArm::confidence;
      bandit.update(arm, reward, p[static_cast<std::size_t>(arm)]);
    }
    total_freq += good / 50.0;
  }
  CHECK(total_freq / kRuns > 0.8);
}

TEST_CASE("bandit with equal rewards stays balanced in expectation") {
  constexpr int kRuns = 4000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int run = 0; run < kRuns; ++run) {
    AlblBandit bandit(0.3, 0.1);
    Rng rng(static_cast<std::uint64_t>(run) + 99);
    for (int round = 0; round < 20; ++round) {
      const auto p = bandit.probabilities();
      const auto arm = bandit.draw(rng);
      bandit.update(arm, 0.5, p[static_cast<std::size_t>(arm)]);
    }
    const double p0 = bandit.probabilities()[0];
    sum += p0;
    sum_sq += p0 * p0;
  }
  const double mean = sum / kRuns;
  const double se = std::sqrt((sum_sq / kRuns - mean * mean) / kRuns);
  CHECK(std::abs(mean - 0.5) <= 3.0 * se);
}

TEST_CASE("config validation") {
  auto cfg = small_experiment(SelectorKind::random);
  CHECK_NOTHROW(cfg.validate());
  cfg.initial_labels = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
  cfg = small_experiment(SelectorKind::random);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("zero rounds logs the initial model only") {
  auto cfg = small_experiment(SelectorKind::badge);
  cfg.rounds = 0;
  const auto r = run_repetition(cfg, mixture(), 0);
  REQUIRE(r.rounds.size() == 1);
  CHECK(r.rounds[0].labels == cfg.initial_labels);
  CHECK(r.rounds[0].round == 0);
  CHECK(std::isnan(r.rounds[0].log_gram_det));
  CHECK_FALSE(r.truncated);
}

TEST_CASE("repetitions are deterministic and seeded by base + r") {
  const auto cfg = small_experiment(SelectorKind::random);
  const auto a = run_experiment(cfg, mixture(), 2);
  const auto b = run_experiment(cfg, mixture(), 1);
  REQUIRE(a.size() == 2);
  CHECK(a[0].seed == 13);
  CHECK(a[1].seed == 14);
  CHECK(same_logs(a[0], b[0]));
  CHECK(same_logs(a[1], b[1]));
  CHECK(a[0].labeled_ids != a[1].labeled_ids);
}

TEST_CASE("every selector grows S by exactly B from unlabeled candidates") {
  for (const auto kind : {SelectorKind::random, SelectorKind::confidence, SelectorKind::margin,
                          SelectorKind::entropy, SelectorKind::coreset, SelectorKind::badge,
                          SelectorKind::badge_kdpp, SelectorKind::albl}) {
    CAPTURE(to_string(kind));
    const auto cfg = small_experiment(kind);
    const Dataset& ds = mixture();
    std::size_t traces = 0;
    ExperimentHooks hooks;
    hooks.on_selection = [&](const SelectionTrace& trace) {
      ++traces;
      const std::set<std::size_t> before(trace.labeled_before.begin(), trace.labeled_before.end());
      const std::set<std::size_t> cands(trace.candidate_ids.begin(), trace.candidate_ids.end());
      const std::set<std::size_t> picked(trace.selected_ids.begin(), trace.selected_ids.end());
      CHECK(before.size() == cfg.initial_labels + trace.round * cfg.batch_size);
      CHECK(picked.size() == cfg.batch_size);
      for (const auto id : trace.candidate_ids) {
        CHECK(before.count(id) == 0);
      }
      for (const auto id : picked) {
        CHECK(cands.count(id) == 1);
      }
      if (kind == SelectorKind::badge) {
        // The matrix handed to the sampler is the embedding of the current predictions.
        REQUIRE(trace.embeddings != nullptr);
        for (std::size_t i = 0; i < trace.records.size(); i += 37) {
          const auto g = gradient_embedding(trace.records[i]);
          for (std::size_t j = 0; j < g.size(); ++j) {
            CHECK((*trace.embeddings)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) ==
                  g.values()[j]);
          }
        }
      }
    };
    const auto r = run_repetition(cfg, ds, 0, hooks);
    CHECK(traces == cfg.rounds);
    REQUIRE(r.rounds.size() == cfg.rounds + 1);
    for (std::size_t t = 0; t < r.rounds.size(); ++t) {
      CHECK(r.rounds[t].labels == cfg.initial_labels + t * cfg.batch_size);
      CHECK(r.rounds[t].test_accuracy >= 0.0);
      CHECK(r.rounds[t].test_accuracy <= 1.0);
    }
    const std::set<std::size_t> s(r.labeled_ids.begin(), r.labeled_ids.end());
    CHECK(s.size() == r.labeled_ids.size());
    CHECK(s.size() == cfg.initial_labels + cfg.rounds * cfg.batch_size);
    for (const auto id : s) {
      CHECK(std::binary_search(ds.train_ids.begin(), ds.train_ids.end(), id));
    }
    if (kind == SelectorKind::albl) {
      CHECK(r.rounds[0].metadata.find("arm=") != std::string::npos);
    }
  }
}

TEST_CASE("exhausting the pool matches full supervision") {
  // 375 points: 75 held out, a 300-example pool.
  const Dataset ds = synth_gaussian_mixture(3, 4, 375, 1.5, 3);
  REQUIRE(ds.train_ids.size() == 300);
  ExperimentConfig cfg = small_experiment(SelectorKind::random);
  cfg.initial_labels = 100;
  cfg.batch_size = 100;
  cfg.rounds = 2;
  const auto r = run_repetition(cfg, ds, 0);
  REQUIRE(r.rounds.size() == 3);
  CHECK_FALSE(r.truncated);
  auto s = r.labeled_ids;
  std::sort(s.begin(), s.end());
  CHECK(s == ds.train_ids);

  MlpConfig model = cfg.model;
  model.input_dim = ds.input_dim();
  model.num_classes = ds.num_classes;
  model.rng_seed = round_model_seed(cfg.seed, 2);
  const auto full = train_from_scratch(model, ds.rows(ds.train_ids), ds.labels_of(ds.train_ids));
  const double full_acc = test_accuracy(full.params, ds.rows(ds.test_ids), ds.labels_of(ds.test_ids));
  CHECK(r.rounds.back().test_accuracy == full_acc);
}

TEST_CASE("running out of candidates truncates") {
  const Dataset ds = synth_gaussian_mixture(3, 4, 375, 1.5, 3);
  ExperimentConfig cfg = small_experiment(SelectorKind::badge);
  cfg.initial_labels = 100;
  cfg.batch_size = 150;
  cfg.rounds = 4;
  const auto r = run_repetition(cfg, ds, 0);
  CHECK(r.truncated);
  CHECK(r.rounds.size() == 2);
  CHECK(r.rounds.back().labels == 250);
}

TEST_CASE("oracle labels are never altered") {
  const Dataset ds = synth_gaussian_mixture(3, 4, 200, 1.0, 5);
  const auto before = ds.labels;
  ExperimentConfig cfg = small_experiment(SelectorKind::confidence);
  run_repetition(cfg, ds, 0);
  CHECK(ds.labels == before);
}
