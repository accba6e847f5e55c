#include "badge/al_loop.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "badge/diagnostics.hpp"
#include "badge/errors.hpp"
#include "badge/random.hpp"

namespace badge {
namespace {

constexpr std::uint64_t kInitialDrawStream = 11;
constexpr std::uint64_t kSelectionStream = 1000;
constexpr std::uint64_t kModelStream = 5000;

std::vector<std::size_t> all_positions(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  return p;
}

const Matrix& require(const Matrix* m, const char* what) {
  if (m == nullptr) {
    throw InvalidInput(std::string("selection context is missing ") + what);
  }
  return *m;
}

}  // namespace

std::string_view to_string(SelectorKind kind) {
  switch (kind) {
    case SelectorKind::random:
      return "random";
    case SelectorKind::confidence:
      return "confidence";
    case SelectorKind::margin:
      return "margin";
    case SelectorKind::entropy:
      return "entropy";
    case SelectorKind::coreset:
      return "coreset";
    case SelectorKind::badge:
      return "badge";
    case SelectorKind::badge_kdpp:
      return "badge_kdpp";
    case SelectorKind::albl:
      return "albl";
  }
  return "unknown";
}

SelectorKind parse_selector(std::string_view name) {
  for (const auto kind :
       {SelectorKind::random, SelectorKind::confidence, SelectorKind::margin,
        SelectorKind::entropy, SelectorKind::coreset, SelectorKind::badge,
        SelectorKind::badge_kdpp, SelectorKind::albl}) {
    if (name == to_string(kind)) {
      return kind;
    }
  }
  if (name == "rand") return SelectorKind::random;
  if (name == "conf") return SelectorKind::confidence;
  if (name == "marg") return SelectorKind::margin;
  if (name == "kdpp") return SelectorKind::badge_kdpp;
  throw InvalidInput("unknown selector '" + std::string(name) + "'");
}

std::string_view to_string(AlblArm arm) {
  return arm == AlblArm::coreset ? "coreset" : "confidence";
}

AlblBandit::AlblBandit(double eta, double gamma) : eta_(eta), gamma_(gamma) {
  if (!(eta >= 0.0) || !(gamma >= 0.0 && gamma <= 1.0)) {
    throw InvalidInput("AlblBandit: need eta >= 0 and gamma in [0, 1]");
  }
}

std::array<double, 2> AlblBandit::probabilities() const {
  const double top = std::max(cumulative_[0], cumulative_[1]);
  const double w0 = std::exp(eta_ * (cumulative_[0] - top));
  const double w1 = std::exp(eta_ * (cumulative_[1] - top));
  const double p0 = (1.0 - gamma_) * w0 / (w0 + w1) + gamma_ / 2.0;
  return {p0, 1.0 - p0};
}

AlblArm AlblBandit::draw(Rng& rng) const {
  return rng.uniform() < probabilities()[0] ? AlblArm::coreset : AlblArm::confidence;
}

void AlblBandit::update(AlblArm arm, double reward, double probability) {
  if (!(probability > 0.0)) {
    throw InvalidInput("AlblBandit::update: probability must be positive");
  }
  cumulative_[static_cast<std::size_t>(arm)] += reward / probability;
}

bool needs_embeddings(SelectorKind kind) {
  return kind == SelectorKind::badge || kind == SelectorKind::badge_kdpp;
}

bool needs_features(SelectorKind kind) {
  return kind == SelectorKind::coreset || kind == SelectorKind::albl;
}

RoundSelection albl_select(const AlblBandit& state, const SelectionContext& context,
                           std::size_t batch_size, std::uint64_t rng_seed) {
  Rng rng(mix_seed(rng_seed, 5));
  const AlblArm arm = state.draw(rng);
  const double probability = state.probabilities()[static_cast<std::size_t>(arm)];
  SelectorSpec delegate;
  delegate.kind = arm == AlblArm::coreset ? SelectorKind::coreset : SelectorKind::confidence;
  RoundSelection out = select_batch(delegate, context, batch_size, rng_seed);
  out.arm = arm;
  out.arm_probability = probability;
  std::ostringstream meta;
  meta << "arm=" << to_string(arm) << ";p=" << probability;
  out.metadata = meta.str();
  return out;
}

RoundSelection select_batch(const SelectorSpec& spec, const SelectionContext& context,
                            std::size_t batch_size, std::uint64_t rng_seed,
                            const AlblBandit* bandit) {
  const std::size_t n = context.candidate_ids.size();
  if (batch_size > n) {
    throw InvalidInput("select_batch: batch size exceeds candidates");
  }
  RoundSelection out;
  switch (spec.kind) {
    case SelectorKind::random:
      out.positions = random_select(all_positions(n), batch_size, rng_seed);
      break;
    case SelectorKind::confidence:
      out.positions = uncertainty_select(context.records, UncertaintyKind::confidence, batch_size);
      break;
    case SelectorKind::margin:
      out.positions = uncertainty_select(context.records, UncertaintyKind::margin, batch_size);
      break;
    case SelectorKind::entropy:
      out.positions = uncertainty_select(context.records, UncertaintyKind::entropy, batch_size);
      break;
    case SelectorKind::coreset:
      out.positions = ffkc_select(require(context.labeled_features, "labeled features"),
                                  require(context.candidate_features, "candidate features"),
                                  batch_size);
      break;
    case SelectorKind::badge:
      out.positions = kmeanspp_seed(require(context.embeddings, "embeddings"), batch_size, rng_seed);
      break;
    case SelectorKind::badge_kdpp:
      out.positions = kdpp_mcmc_sample(require(context.embeddings, "embeddings"), batch_size,
                                       rng_seed, spec.kdpp_tau);
      break;
    case SelectorKind::albl:
      if (bandit == nullptr) {
        throw InvalidInput("select_batch: albl requires bandit state");
      }
      return albl_select(*bandit, context, batch_size, rng_seed);
  }
  if (spec.kind != SelectorKind::random && !context.records.empty() &&
      context.records.size() != n) {
    throw InvalidInput("select_batch: records not aligned with candidates");
  }
  out.result.selected_ids.reserve(out.positions.size());
  for (const auto p : out.positions) {
    out.result.selected_ids.push_back(context.candidate_ids[p]);
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (initial_labels == 0) {
    throw InvalidInput("ExperimentConfig: need at least one initial label");
  }
  if (batch_size == 0) {
    throw InvalidInput("ExperimentConfig: batch size must be positive");
  }
  if (repetitions == 0) {
    throw InvalidInput("ExperimentConfig: need at least one repetition");
  }
  if (selector.kind == SelectorKind::albl) {
    AlblBandit check(selector.albl_eta, selector.albl_gamma);
    (void)check;
  }
}

std::uint64_t round_model_seed(std::uint64_t rep_seed, std::size_t round) {
  return mix_seed(rep_seed, kModelStream + round);
}

RepetitionResult run_repetition(const ExperimentConfig& config, const Dataset& dataset,
                                std::size_t repetition, const ExperimentHooks& hooks) {
  config.validate();
  const std::size_t pool_size = dataset.train_ids.size();
  if (config.initial_labels > pool_size) {
    throw InvalidInput("run_repetition: more initial labels than pool examples");
  }
  if (dataset.test_ids.empty()) {
    throw InvalidInput("run_repetition: dataset has an empty test split");
  }

  RepetitionResult result;
  result.repetition = repetition;
  result.seed = config.seed + repetition;
  const std::uint64_t rep_seed = result.seed;

  MlpConfig model = config.model;
  model.input_dim = dataset.input_dim();
  model.num_classes = dataset.num_classes;

  const Matrix test_x = dataset.rows(dataset.test_ids);
  const auto test_y = dataset.labels_of(dataset.test_ids);

  result.labeled_ids = random_select(dataset.train_ids, config.initial_labels,
                                     mix_seed(rep_seed, kInitialDrawStream));
  std::vector<char> labeled(dataset.size(), 0);
  for (const auto id : result.labeled_ids) {
    labeled[id] = 1;
  }

  const SelectorKind kind = config.selector.kind;
  AlblBandit bandit(config.selector.albl_eta, config.selector.albl_gamma);
  struct PendingReward {
    AlblArm arm;
    double probability;
    std::vector<std::size_t> batch;
  };
  std::optional<PendingReward> pending;

  for (std::size_t t = 0; t <= config.rounds; ++t) {
    std::vector<std::size_t> train_ids = result.labeled_ids;
    std::sort(train_ids.begin(), train_ids.end());
    const Matrix train_x = dataset.rows(train_ids);
    model.rng_seed = round_model_seed(rep_seed, t);
    const auto trained = train_from_scratch(model, train_x, dataset.labels_of(train_ids));
    const MlpParams& params = trained.params;

    RoundLog log;
    log.round = t;
    log.labels = result.labeled_ids.size();
    log.test_accuracy = test_accuracy(params, test_x, test_y);
    log.log_gram_det = std::numeric_limits<double>::quiet_NaN();
    log.mean_norm = std::numeric_limits<double>::quiet_NaN();

    if (pending) {
      const double reward = test_accuracy(params, dataset.rows(pending->batch),
                                          dataset.labels_of(pending->batch));
      bandit.update(pending->arm, reward, pending->probability);
      pending.reset();
    }

    if (t == config.rounds) {
      result.rounds.push_back(std::move(log));
      break;
    }

    std::vector<std::size_t> candidates;
    candidates.reserve(pool_size - result.labeled_ids.size());
    for (const auto id : dataset.train_ids) {
      if (!labeled[id]) {
        candidates.push_back(id);
      }
    }
    if (candidates.size() < config.batch_size) {
      result.truncated = true;
      result.rounds.push_back(std::move(log));
      break;
    }

    const auto records = predict_pool(params, dataset.rows(candidates), candidates);
    Matrix embeddings;
    if (needs_embeddings(kind) || config.compute_diagnostics) {
      embeddings = embedding_matrix(records);
    }
    Matrix candidate_features;
    Matrix labeled_features;
    if (needs_features(kind)) {
      candidate_features.resize(static_cast<Eigen::Index>(records.size()),
                                static_cast<Eigen::Index>(params.hidden_dim()));
      for (std::size_t i = 0; i < records.size(); ++i) {
        candidate_features.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::RowVectorXd>(records[i].features.data(),
                                                 candidate_features.cols());
      }
      labeled_features = forward_batch(params, train_x).features;
    }

    SelectionContext context;
    context.candidate_ids = candidates;
    context.records = records;
    context.embeddings = embeddings.size() > 0 ? &embeddings : nullptr;
    context.candidate_features = needs_features(kind) ? &candidate_features : nullptr;
    context.labeled_features = needs_features(kind) ? &labeled_features : nullptr;

    const auto started = std::chrono::steady_clock::now();
    RoundSelection selection = select_batch(config.selector, context, config.batch_size,
                                            mix_seed(rep_seed, kSelectionStream + t), &bandit);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    selection.result.wall_time_seconds = elapsed.count();
    log.selection_seconds = config.record_timing ? elapsed.count() : 0.0;

    if (config.compute_diagnostics && !selection.positions.empty()) {
      const auto diag = batch_diagnostics(embeddings, selection.positions);
      log.log_gram_det = diag.log_gram_det;
      log.mean_norm = diag.mean_norm;
    }
    log.metadata = selection.metadata;

    if (hooks.on_selection) {
      hooks.on_selection(SelectionTrace{repetition, t, result.labeled_ids, candidates,
                                        selection.result.selected_ids,
                                        embeddings.size() > 0 ? &embeddings : nullptr, records});
    }

    for (const auto id : selection.result.selected_ids) {
      labeled[id] = 1;
      result.labeled_ids.push_back(id);
    }
    if (selection.arm) {
      pending = PendingReward{*selection.arm, selection.arm_probability,
                              selection.result.selected_ids};
    }
    result.rounds.push_back(std::move(log));
  }
  return result;
}

std::vector<RepetitionResult> run_experiment(const ExperimentConfig& config,
                                             const Dataset& dataset, std::size_t workers) {
  config.validate();
  std::vector<RepetitionResult> results(config.repetitions);
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  workers = std::min(workers, config.repetitions);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t r = next++; r < config.repetitions; r = next++) {
      try {
        results[r] = run_repetition(config, dataset, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back(work);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
  return results;
}

}  // namespace badge
