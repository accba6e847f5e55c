#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "badge/embedding.hpp"
#include "badge/types.hpp"

namespace badge {

class Rng;

/// A batch query against the unlabeled pool U \ S.
struct SelectionRequest {
  std::vector<std::size_t> candidate_ids;
  std::size_t batch_size = 0;
  std::uint64_t rng_seed = 0;
};

/// Throws InvalidInput if batch_size exceeds the candidates or ids repeat.
void validate(const SelectionRequest& request);

struct SelectionResult {
  std::vector<std::size_t> selected_ids;
  double wall_time_seconds = 0.0;
};

// All samplers below return row positions into the point set they were given.

/// k-means++ seeding. The first center is uniform; each later center is drawn
/// with probability proportional to the squared distance to its nearest chosen
/// center. If every remaining point coincides with a center the draw falls
/// back to uniform over the points not yet chosen.
std::vector<std::size_t> kmeanspp_seed(const Matrix& points, std::size_t k, std::uint64_t rng_seed);

/// Continues a k-means++ seeding from already chosen centers until `k` are
/// chosen, drawing from `rng`.
std::vector<std::size_t> kmeanspp_extend(const Matrix& points, std::vector<std::size_t> centers,
                                         std::size_t k, Rng& rng);

/// floor(5 k ln k), at least 1.
std::size_t default_mcmc_steps(std::size_t k);

/// Approximate k-DPP sample under the linear kernel L = X X^T using a
/// Metropolis swap chain of `tau` steps (default_mcmc_steps(k) when unset).
/// Singular subsets carry zero weight; if 100 uniformly drawn initial subsets
/// are all singular the result of kmeanspp_seed is returned instead.
std::vector<std::size_t> kdpp_mcmc_sample(const Matrix& points, std::size_t k,
                                          std::uint64_t rng_seed,
                                          std::optional<std::size_t> tau = std::nullopt);

/// Greedy furthest-first traversal (k-center). Each pick maximizes the minimum
/// Euclidean distance to `labeled` plus earlier picks. With no labeled points
/// the first pick is the pool point furthest from the pool centroid. Ties go to
/// the lowest index.
std::vector<std::size_t> ffkc_select(const Matrix& labeled, const Matrix& pool, std::size_t k);

enum class UncertaintyKind { confidence, margin, entropy };

std::string_view to_string(UncertaintyKind kind);

/// confidence = max p; margin = top1 - top2; entropy = sum p ln(1/p).
double uncertainty_score(std::span<const double> probs, UncertaintyKind kind);
std::vector<double> uncertainty_scores(std::span<const PredictionRecord> records,
                                       UncertaintyKind kind);

/// Positions of the `k` most uncertain records: smallest confidence or margin,
/// largest entropy. Ties go to the lowest position.
std::vector<std::size_t> uncertainty_select(std::span<const PredictionRecord> records,
                                            UncertaintyKind kind, std::size_t k);

/// k ids drawn uniformly without replacement (partial Fisher-Yates).
std::vector<std::size_t> random_select(std::span<const std::size_t> candidate_ids, std::size_t k,
                                       std::uint64_t rng_seed);

}  // namespace badge
