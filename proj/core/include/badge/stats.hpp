#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace badge {

/// Two-sided 5% critical value of Student's t with 4 degrees of freedom,
/// used for five paired repetitions.
inline constexpr double kCriticalT5 = 2.776;

/// Paired t statistic sqrt(n) * mean(d) / sd(d) with d = e_i - e_j and the
/// n - 1 divisor for sd. Zero variance yields +-infinity, or 0 when the mean
/// difference is also 0.
double t_score(std::span<const double> errors_i, std::span<const double> errors_j);

/// kCriticalT5 for n = 5, otherwise the 0.975 quantile of t with n - 1 dof.
double critical_value(std::size_t repetitions);

enum class Outcome { first_wins, second_wins, tie };

/// Lower error wins: the first algorithm beats the second iff t < -critical,
/// the second beats the first iff t > critical.
Outcome beats(std::span<const double> errors_i, std::span<const double> errors_j,
              double critical = kCriticalT5);

/// {M + 2^(m-1) B : m = 1 .. floor(log2((n0 - M) / B))}.
std::vector<std::size_t> budget_schedule(std::size_t initial, std::size_t batch, std::size_t n0);

/// Smallest budget whose accuracy reaches 99% of the accuracy at the largest
/// budget. `curve` holds (budget, mean accuracy) pairs in any order.
std::size_t compute_n0(std::vector<std::pair<std::size_t, double>> curve);

/// One (dataset, batch size, architecture, label budget) cell.
struct SettingKey {
  std::string dataset;
  std::size_t batch_size = 0;
  std::string architecture;
  std::size_t budget = 0;

  /// The (D, B, A) part, which groups budgets for weighting.
  std::string group() const;
  auto operator<=>(const SettingKey&) const = default;
};

/// Test errors of every algorithm in one setting, one entry per repetition
/// (aligned across algorithms).
struct SettingResult {
  SettingKey key;
  std::map<std::string, std::vector<double>> errors;
};

/// Entry (i, j) accumulates 1/n_{D,B,A} each time algorithm i beats j.
struct PenaltyMatrix {
  std::vector<std::string> algorithms;
  std::vector<std::vector<double>> entries;
  std::size_t combinations = 0;

  double at(const std::string& winner, const std::string& loser) const;
  /// Mean of each column over the other algorithms; lower is better.
  std::vector<double> column_averages() const;
};

PenaltyMatrix penalty_matrix(std::span<const SettingResult> results,
                             std::vector<std::string> algorithms);

struct CdfPoint {
  double x = 0.0;
  double cumulative_weight = 0.0;
};

/// Weighted empirical CDF of normalized errors per algorithm. Each (D, B, A)
/// group carries total weight 1 spread evenly over its budgets.
struct NormalizedErrorCdf {
  std::map<std::string, std::vector<CdfPoint>> curves;  // right-continuous steps
  double total_weight = 0.0;
  std::vector<std::string> warnings;

  /// Total weight of settings with normalized error <= x.
  double evaluate(const std::string& algorithm, double x) const;
};

NormalizedErrorCdf normalized_error_cdf(std::span<const SettingResult> results,
                                        const std::string& random_algorithm = "random");

}  // namespace badge
