#include "badge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "badge/errors.hpp"

namespace badge {

double t_score(std::span<const double> errors_i, std::span<const double> errors_j) {
  if (errors_i.size() != errors_j.size()) {
    throw InvalidInput("t_score: paired samples differ in length");
  }
  const std::size_t n = errors_i.size();
  if (n < 2) {
    throw InvalidInput("t_score: need at least two paired samples");
  }
  double sum = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    sum += errors_i[l] - errors_j[l];
  }
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const double r = errors_i[l] - errors_j[l] - mean;
    ss += r * r;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) {
    if (mean == 0.0) {
      return 0.0;
    }
    return std::copysign(std::numeric_limits<double>::infinity(), mean);
  }
  return std::sqrt(static_cast<double>(n)) * mean / sd;
}

double critical_value(std::size_t repetitions) {
  if (repetitions < 2) {
    throw InvalidInput("critical_value: need at least two repetitions");
  }
  if (repetitions == 5) {
    return kCriticalT5;
  }
  const boost::math::students_t dist(static_cast<double>(repetitions - 1));
  return boost::math::quantile(dist, 0.975);
}

Outcome beats(std::span<const double> errors_i, std::span<const double> errors_j,
              double critical) {
  const double t = t_score(errors_i, errors_j);
  if (t < -critical) {
    return Outcome::first_wins;
  }
  if (t > critical) {
    return Outcome::second_wins;
  }
  return Outcome::tie;
}

std::vector<std::size_t> budget_schedule(std::size_t initial, std::size_t batch, std::size_t n0) {
  if (batch == 0) {
    throw InvalidInput("budget_schedule: batch size must be positive");
  }
  if (n0 <= initial) {
    throw InvalidInput("budget_schedule: n0 must exceed the initial label count");
  }
  const std::size_t span = n0 - initial;
  // floor(log2(span / batch)) is the largest m with 2^m * batch <= span.
  std::vector<std::size_t> budgets;
  for (std::size_t step = batch; 2 * step <= span; step *= 2) {
    budgets.push_back(initial + step);
  }
  return budgets;
}

std::size_t compute_n0(std::vector<std::pair<std::size_t, double>> curve) {
  if (curve.empty()) {
    throw InvalidInput("compute_n0: empty curve");
  }
  std::sort(curve.begin(), curve.end());
  const double target = 0.99 * curve.back().second;
  for (const auto& [budget, accuracy] : curve) {
    if (accuracy >= target) {
      return budget;
    }
  }
  return curve.back().first;
}

std::string SettingKey::group() const {
  return dataset + "|" + std::to_string(batch_size) + "|" + architecture;
}

namespace {

std::map<std::string, std::size_t> budgets_per_group(std::span<const SettingResult> results) {
  std::map<std::string, std::set<std::size_t>> budgets;
  for (const auto& r : results) {
    budgets[r.key.group()].insert(r.key.budget);
  }
  std::map<std::string, std::size_t> counts;
  for (const auto& [group, set] : budgets) {
    counts[group] = set.size();
  }
  return counts;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (const double x : v) {
    s += x;
  }
  return s / static_cast<double>(v.size());
}

}  // namespace

double PenaltyMatrix::at(const std::string& winner, const std::string& loser) const {
  const auto find = [this](const std::string& name) {
    const auto it = std::find(algorithms.begin(), algorithms.end(), name);
    if (it == algorithms.end()) {
      throw InvalidInput("PenaltyMatrix: unknown algorithm " + name);
    }
    return static_cast<std::size_t>(it - algorithms.begin());
  };
  return entries[find(winner)][find(loser)];
}

std::vector<double> PenaltyMatrix::column_averages() const {
  const std::size_t n = algorithms.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) {
    return out;
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      out[j] += entries[i][j];
    }
    out[j] /= static_cast<double>(n - 1);
  }
  return out;
}

PenaltyMatrix penalty_matrix(std::span<const SettingResult> results,
                             std::vector<std::string> algorithms) {
  const std::size_t n = algorithms.size();
  PenaltyMatrix out{std::move(algorithms), std::vector<std::vector<double>>(n, std::vector<double>(n, 0.0)), 0};
  const auto counts = budgets_per_group(results);
  out.combinations = counts.size();

  for (const auto& setting : results) {
    const double weight = 1.0 / static_cast<double>(counts.at(setting.key.group()));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ei = setting.errors.find(out.algorithms[i]);
      if (ei == setting.errors.end()) {
        continue;
      }
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto ej = setting.errors.find(out.algorithms[j]);
        if (ej == setting.errors.end()) {
          continue;
        }
        const double critical = critical_value(ei->second.size());
        switch (beats(ei->second, ej->second, critical)) {
          case Outcome::first_wins:
            out.entries[i][j] += weight;
            break;
          case Outcome::second_wins:
            out.entries[j][i] += weight;
            break;
          case Outcome::tie:
            break;
        }
      }
    }
  }
  return out;
}

double NormalizedErrorCdf::evaluate(const std::string& algorithm, double x) const {
  const auto it = curves.find(algorithm);
  if (it == curves.end()) {
    throw InvalidInput("NormalizedErrorCdf: unknown algorithm " + algorithm);
  }
  double y = 0.0;
  for (const auto& point : it->second) {
    if (point.x > x) {
      break;
    }
    y = point.cumulative_weight;
  }
  return y;
}

NormalizedErrorCdf normalized_error_cdf(std::span<const SettingResult> results,
                                        const std::string& random_algorithm) {
  NormalizedErrorCdf out;
  const auto counts = budgets_per_group(results);
  std::map<std::string, std::vector<std::pair<double, double>>> samples;

  for (const auto& setting : results) {
    const auto rand_it = setting.errors.find(random_algorithm);
    const std::string where = setting.key.group() + "|" + std::to_string(setting.key.budget);
    if (rand_it == setting.errors.end() || rand_it->second.empty()) {
      out.warnings.push_back("skipped " + where + ": no " + random_algorithm + " results");
      continue;
    }
    const double rand_error = mean_of(rand_it->second);
    if (rand_error == 0.0) {
      out.warnings.push_back("skipped " + where + ": " + random_algorithm + " error is zero");
      continue;
    }
    const double weight = 1.0 / static_cast<double>(counts.at(setting.key.group()));
    out.total_weight += weight;
    for (const auto& [algorithm, errors] : setting.errors) {
      if (errors.empty()) {
        continue;
      }
      samples[algorithm].emplace_back(mean_of(errors) / rand_error, weight);
    }
  }

  for (auto& [algorithm, points] : samples) {
    std::sort(points.begin(), points.end());
    auto& curve = out.curves[algorithm];
    double cumulative = 0.0;
    for (const auto& [x, w] : points) {
      cumulative += w;
      if (!curve.empty() && curve.back().x == x) {
        curve.back().cumulative_weight = cumulative;
      } else {
        curve.push_back({x, cumulative});
      }
    }
  }
  return out;
}

}  // namespace badge
