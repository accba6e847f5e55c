#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "badge/dataset.hpp"
#include "badge/embedding.hpp"
#include "badge/mlp.hpp"
#include "badge/samplers.hpp"
#include "badge/types.hpp"

namespace badge {

class Rng;

enum class SelectorKind {
  random,
  confidence,
  margin,
  entropy,
  coreset,     // furthest-first k-center on penultimate features
  badge,       // k-means++ seeding on gradient embeddings
  badge_kdpp,  // k-DPP swap chain on gradient embeddings
  albl,        // bandit over {coreset, confidence}
};

std::string_view to_string(SelectorKind kind);
/// Accepts the names returned by to_string; also "conf", "marg", "rand", "kdpp".
SelectorKind parse_selector(std::string_view name);

struct SelectorSpec {
  SelectorKind kind = SelectorKind::badge;
  double albl_eta = 0.3;
  double albl_gamma = 0.1;
  std::optional<std::size_t> kdpp_tau;  // default floor(5 k ln k)
};

/// Arms of the ALBL bandit.
enum class AlblArm : std::size_t { coreset = 0, confidence = 1 };

std::string_view to_string(AlblArm arm);

/// Two-arm exponential weights with uniform exploration. Arm a is played with
/// probability (1 - gamma) * softmax(eta * R)_a + gamma / 2, where R holds the
/// importance-weighted cumulative rewards (reward / probability of the arm
/// that was played).
class AlblBandit {
 public:
  AlblBandit(double eta, double gamma);

  std::array<double, 2> probabilities() const;
  AlblArm draw(Rng& rng) const;
  /// Credits `reward` in [0, 1] to `arm`, weighted by the probability with
  /// which it was drawn.
  void update(AlblArm arm, double reward, double probability);
  const std::array<double, 2>& cumulative_rewards() const { return cumulative_; }

 private:
  double eta_;
  double gamma_;
  std::array<double, 2> cumulative_{0.0, 0.0};
};

/// Everything a selector may look at for one round. Rows of `candidate_features`,
/// `embeddings` and `records` are aligned with `candidate_ids`.
struct SelectionContext {
  std::span<const std::size_t> candidate_ids;
  std::span<const PredictionRecord> records;
  const Matrix* embeddings = nullptr;          // required by badge / badge_kdpp
  const Matrix* candidate_features = nullptr;  // penultimate z; coreset / albl
  const Matrix* labeled_features = nullptr;    // penultimate z of S; coreset / albl
};

struct RoundSelection {
  SelectionResult result;
  std::vector<std::size_t> positions;  // rows of the context, aligned with result
  std::string metadata;
  std::optional<AlblArm> arm;
  double arm_probability = 0.0;
};

/// ALBL round: draw an arm from the bandit and delegate to it.
RoundSelection albl_select(const AlblBandit& state, const SelectionContext& context,
                           std::size_t batch_size, std::uint64_t rng_seed);

/// Dispatches one selection. `bandit` must be non-null for SelectorKind::albl.
RoundSelection select_batch(const SelectorSpec& spec, const SelectionContext& context,
                            std::size_t batch_size, std::uint64_t rng_seed,
                            const AlblBandit* bandit = nullptr);

/// Whether the selector reads gradient embeddings / penultimate features.
bool needs_embeddings(SelectorKind kind);
bool needs_features(SelectorKind kind);

struct ExperimentConfig {
  std::string dataset_name;
  SelectorSpec selector;
  std::size_t initial_labels = 100;  // M
  std::size_t batch_size = 100;      // B
  std::size_t rounds = 10;           // T
  std::size_t repetitions = 5;       // R
  std::uint64_t seed = 0;            // repetition r uses seed + r
  MlpConfig model;                   // input_dim / num_classes taken from the dataset
  bool compute_diagnostics = true;
  bool record_timing = true;

  void validate() const;
};

/// One row per trained model. Row t is the model trained on M + t B labels;
/// the selection fields describe the batch it picked (NaN / 0 on the last row).
struct RoundLog {
  std::size_t round = 0;
  std::size_t labels = 0;
  double test_accuracy = 0.0;
  double selection_seconds = 0.0;
  double log_gram_det = 0.0;
  double mean_norm = 0.0;
  std::string metadata;
};

struct RepetitionResult {
  std::size_t repetition = 0;
  std::uint64_t seed = 0;
  std::vector<RoundLog> rounds;
  bool truncated = false;
  std::vector<std::size_t> labeled_ids;  // final S, in order of acquisition
};

/// Called once per selection with the candidates it saw and what it returned.
struct SelectionTrace {
  std::size_t repetition = 0;
  std::size_t round = 0;
  std::span<const std::size_t> labeled_before;
  std::span<const std::size_t> candidate_ids;
  std::span<const std::size_t> selected_ids;
  const Matrix* embeddings = nullptr;
  std::span<const PredictionRecord> records;
};

struct ExperimentHooks {
  std::function<void(const SelectionTrace&)> on_selection;
};

/// Seed for the model trained in `round` of a repetition seeded `rep_seed`.
std::uint64_t round_model_seed(std::uint64_t rep_seed, std::size_t round);

RepetitionResult run_repetition(const ExperimentConfig& config, const Dataset& dataset,
                                std::size_t repetition, const ExperimentHooks& hooks = {});

/// Runs all repetitions, `workers` at a time (0 = hardware concurrency).
std::vector<RepetitionResult> run_experiment(const ExperimentConfig& config,
                                             const Dataset& dataset, std::size_t workers = 0);

}  // namespace badge
