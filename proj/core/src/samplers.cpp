#include "badge/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <unordered_set>

#include "badge/errors.hpp"
#include "badge/linalg.hpp"
#include "badge/random.hpp"

namespace badge {
namespace {

void require_k_within(std::size_t k, std::size_t n, const char* who) {
  if (k > n) {
    throw InvalidInput(std::string(who) + ": k=" + std::to_string(k) + " exceeds " +
                       std::to_string(n) + " points");
  }
}

double squared_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  return (a.row(i) - b.row(j)).squaredNorm();
}

void update_min_distances(const Matrix& points, Eigen::Index center, std::vector<double>& min_d2) {
  const auto c = points.row(center);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double d2 = (points.row(i) - c).squaredNorm();
    if (d2 < min_d2[static_cast<std::size_t>(i)]) {
      min_d2[static_cast<std::size_t>(i)] = d2;
    }
  }
}

}  // namespace

void validate(const SelectionRequest& request) {
  if (request.batch_size > request.candidate_ids.size()) {
    throw InvalidInput("SelectionRequest: batch_size exceeds number of candidates");
  }
  std::unordered_set<std::size_t> seen;
  for (const auto id : request.candidate_ids) {
    if (!seen.insert(id).second) {
      throw InvalidInput("SelectionRequest: duplicate candidate id " + std::to_string(id));
    }
  }
}

std::vector<std::size_t> kmeanspp_seed(const Matrix& points, std::size_t k,
                                       std::uint64_t rng_seed) {
  const auto n = static_cast<std::size_t>(points.rows());
  require_k_within(k, n, "kmeanspp_seed");
  if (k == 0) {
    return {};
  }
  Rng rng(rng_seed);
  std::vector<std::size_t> centers{rng.index(n)};
  return kmeanspp_extend(points, std::move(centers), k, rng);
}

std::vector<std::size_t> kmeanspp_extend(const Matrix& points, std::vector<std::size_t> centers,
                                         std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(points.rows());
  require_k_within(k, n, "kmeanspp_extend");
  std::vector<char> chosen(n, 0);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  for (const auto c : centers) {
    if (c >= n || chosen[c]) {
      throw InvalidInput("kmeanspp_extend: invalid or repeated initial center");
    }
    chosen[c] = 1;
    update_min_distances(points, static_cast<Eigen::Index>(c), min_d2);
  }
  centers.reserve(k);

  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) {
        total += min_d2[i];
      }
    }

    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double cumulative = 0.0;
      std::size_t last_positive = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || min_d2[i] <= 0.0) {
          continue;
        }
        last_positive = i;
        cumulative += min_d2[i];
        if (cumulative > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        pick = last_positive;  // rounding left target at the very end
      }
    } else {
      // Every remaining point sits on a center: uniform over the rest.
      std::vector<std::size_t> remaining;
      remaining.reserve(n - centers.size());
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) {
          remaining.push_back(i);
        }
      }
      pick = remaining[rng.index(remaining.size())];
    }

    chosen[pick] = 1;
    centers.push_back(pick);
    update_min_distances(points, static_cast<Eigen::Index>(pick), min_d2);
  }
  return centers;
}

std::size_t default_mcmc_steps(std::size_t k) {
  if (k <= 1) {
    return 1;
  }
  const double kd = static_cast<double>(k);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(5.0 * kd * std::log(kd))));
}

std::vector<std::size_t> kdpp_mcmc_sample(const Matrix& points, std::size_t k,
                                          std::uint64_t rng_seed, std::optional<std::size_t> tau) {
  const auto n = static_cast<std::size_t>(points.rows());
  require_k_within(k, n, "kdpp_mcmc_sample");
  if (k == 0) {
    return {};
  }
  if (tau && *tau == 0) {
    throw InvalidInput("kdpp_mcmc_sample: tau must be positive");
  }
  const std::size_t steps = tau.value_or(default_mcmc_steps(k));
  const auto ki = static_cast<Eigen::Index>(k);

  Rng rng(rng_seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Matrix gram;
  Matrix scratch(ki, ki);
  double log_det = -std::numeric_limits<double>::infinity();
  constexpr int kMaxInitialDraws = 100;
  for (int attempt = 0; attempt < kMaxInitialDraws; ++attempt) {
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(order[i], order[i + rng.index(n - i)]);
    }
    gram = gram_of_rows(points, std::span<const std::size_t>(order.data(), k));
    scratch = gram;
    log_det = cholesky_log_det_inplace(scratch);
    if (std::isfinite(log_det)) {
      break;
    }
  }
  if (!std::isfinite(log_det)) {
    return kmeanspp_seed(points, k, mix_seed(rng_seed, 1));
  }

  // order[0, k) is the current subset, order[k, n) its complement.
  Vector inner(ki);
  for (std::size_t step = 0; step < steps && k < n; ++step) {
    const std::size_t slot = rng.index(k);
    const std::size_t out_slot = k + rng.index(n - k);
    const double u = rng.uniform();

    const auto incoming = points.row(static_cast<Eigen::Index>(order[out_slot]));
    for (std::size_t j = 0; j < k; ++j) {
      inner[static_cast<Eigen::Index>(j)] =
          j == slot ? incoming.squaredNorm()
                    : incoming.dot(points.row(static_cast<Eigen::Index>(order[j])));
    }
    const auto s = static_cast<Eigen::Index>(slot);
    scratch = gram;
    scratch.row(s) = inner.transpose();
    scratch.col(s) = inner;
    const double proposed = cholesky_log_det_inplace(scratch);
    if (!std::isfinite(proposed)) {
      continue;
    }
    if (proposed >= log_det || u < std::exp(proposed - log_det)) {
      gram.row(s) = inner.transpose();
      gram.col(s) = inner;
      log_det = proposed;
      std::swap(order[slot], order[out_slot]);
    }
  }

  std::vector<std::size_t> result(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(result.begin(), result.end());
  return result;
}

std::vector<std::size_t> ffkc_select(const Matrix& labeled, const Matrix& pool, std::size_t k) {
  const auto n = static_cast<std::size_t>(pool.rows());
  require_k_within(k, n, "ffkc_select");
  if (k == 0) {
    return {};
  }
  if (labeled.rows() > 0 && labeled.cols() != pool.cols()) {
    throw InvalidInput("ffkc_select: labeled and pool dimensions differ");
  }

  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  for (Eigen::Index l = 0; l < labeled.rows(); ++l) {
    for (Eigen::Index i = 0; i < pool.rows(); ++i) {
      const double d2 = squared_distance(pool, i, labeled, l);
      auto& slot = min_d2[static_cast<std::size_t>(i)];
      if (d2 < slot) {
        slot = d2;
      }
    }
  }

  std::vector<char> taken(n, 0);
  std::vector<std::size_t> picks;
  picks.reserve(k);

  auto take = [&](std::size_t i) {
    taken[i] = 1;
    picks.push_back(i);
    update_min_distances(pool, static_cast<Eigen::Index>(i), min_d2);
  };

  if (labeled.rows() == 0) {
    const Eigen::RowVectorXd centroid = pool.colwise().mean();
    std::size_t first = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = (pool.row(static_cast<Eigen::Index>(i)) - centroid).squaredNorm();
      if (d2 > best) {
        best = d2;
        first = i;
      }
    }
    take(first);
  }

  while (picks.size() < k) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!taken[i] && (best == n || min_d2[i] > min_d2[best])) {
        best = i;
      }
    }
    take(best);
  }
  return picks;
}

std::string_view to_string(UncertaintyKind kind) {
  switch (kind) {
    case UncertaintyKind::confidence:
      return "confidence";
    case UncertaintyKind::margin:
      return "margin";
    case UncertaintyKind::entropy:
      return "entropy";
  }
  return "unknown";
}

double uncertainty_score(std::span<const double> probs, UncertaintyKind kind) {
  PredictionRecord check{{probs.begin(), probs.end()}, {}, 0};
  validate(check);
  switch (kind) {
    case UncertaintyKind::confidence:
      return *std::max_element(probs.begin(), probs.end());
    case UncertaintyKind::margin: {
      double top1 = -1.0;
      double top2 = 0.0;
      for (const double p : probs) {
        if (p > top1) {
          top2 = std::max(top2, top1);
          top1 = p;
        } else if (p > top2) {
          top2 = p;
        }
      }
      return top1 - top2;
    }
    case UncertaintyKind::entropy: {
      double h = 0.0;
      for (const double p : probs) {
        if (p > 0.0) {
          h -= p * std::log(p);
        }
      }
      return h;
    }
  }
  throw InvalidInput("uncertainty_score: unknown kind");
}

std::vector<double> uncertainty_scores(std::span<const PredictionRecord> records,
                                       UncertaintyKind kind) {
  std::vector<double> scores;
  scores.reserve(records.size());
  for (const auto& rec : records) {
    scores.push_back(uncertainty_score(rec.probs, kind));
  }
  return scores;
}

std::vector<std::size_t> uncertainty_select(std::span<const PredictionRecord> records,
                                            UncertaintyKind kind, std::size_t k) {
  require_k_within(k, records.size(), "uncertainty_select");
  const auto scores = uncertainty_scores(records, kind);
  const bool largest_first = kind == UncertaintyKind::entropy;
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) {
                        return largest_first ? scores[a] > scores[b] : scores[a] < scores[b];
                      }
                      return a < b;
                    });
  order.resize(k);
  return order;
}

std::vector<std::size_t> random_select(std::span<const std::size_t> candidate_ids, std::size_t k,
                                       std::uint64_t rng_seed) {
  require_k_within(k, candidate_ids.size(), "random_select");
  std::vector<std::size_t> ids(candidate_ids.begin(), candidate_ids.end());
  Rng rng(rng_seed);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(ids[i], ids[i + rng.index(ids.size() - i)]);
  }
  ids.resize(k);
  return ids;
}

}  // namespace badge
