#include "badge/reports.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <set>

#include "badge/errors.hpp"

namespace badge {
namespace {

std::string group_of(const RunManifest& m) {
  return SettingKey{m.dataset, m.batch_size, m.architecture, 0}.group();
}

/// Accuracy per repetition at `labels`, or empty if some repetition lacks it.
std::vector<double> accuracies_at(const RunRecord& run, std::size_t labels) {
  std::vector<double> out;
  for (const auto& rep : run.repetitions) {
    const auto it = std::find_if(rep.begin(), rep.end(),
                                 [&](const RoundLog& r) { return r.labels == labels; });
    if (it == rep.end()) {
      return {};
    }
    out.push_back(it->test_accuracy);
  }
  return out;
}

std::set<std::size_t> logged_budgets(const RunRecord& run) {
  std::set<std::size_t> out;
  for (const auto& rep : run.repetitions) {
    for (const auto& r : rep) {
      out.insert(r.labels);
    }
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return os;
}

}  // namespace

RunRecord load_run(const std::filesystem::path& manifest_path) {
  RunRecord run;
  run.manifest_path = manifest_path;
  run.manifest = read_manifest(manifest_path);
  const auto dir = manifest_path.parent_path();
  for (std::size_t r = 0; r < run.manifest.result_files.size(); ++r) {
    const auto rows = read_results(dir / run.manifest.result_files[r]);
    std::vector<RoundLog> logs;
    logs.reserve(rows.size());
    for (const auto& row : rows) {
      logs.push_back(row.log);
    }
    run.repetitions.push_back(std::move(logs));
  }
  return run;
}

std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> out;
  if (std::filesystem::is_regular_file(root)) {
    out.push_back(root);
    return out;
  }
  if (!std::filesystem::is_directory(root)) {
    throw InvalidInput("no such file or directory: " + root.string());
  }
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().filename() == "manifest.json") {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

Comparison build_comparison(std::span<const RunRecord> runs, const CompareOptions& options) {
  Comparison out;
  std::map<std::string, std::vector<const RunRecord*>> groups;
  std::set<std::string> algorithms;
  for (const auto& run : runs) {
    groups[group_of(run.manifest)].push_back(&run);
    algorithms.insert(run.manifest.selector);
  }
  out.algorithms.assign(algorithms.begin(), algorithms.end());

  for (const auto& [group, members] : groups) {
    std::set<std::string> seen;
    for (const auto* run : members) {
      if (!seen.insert(run->manifest.selector).second) {
        throw InvalidInput("two runs of '" + run->manifest.selector + "' in setting " + group);
      }
    }

    std::set<std::size_t> budgets = logged_budgets(*members.front());
    for (const auto* run : members) {
      std::set<std::size_t> common;
      const auto mine = logged_budgets(*run);
      std::set_intersection(budgets.begin(), budgets.end(), mine.begin(), mine.end(),
                            std::inserter(common, common.end()));
      budgets = std::move(common);
    }

    if (!options.all_budgets) {
      const auto rand_it = std::find_if(members.begin(), members.end(), [&](const RunRecord* r) {
        return r->manifest.selector == options.random_algorithm;
      });
      if (rand_it == members.end()) {
        out.warnings.push_back("skipped " + group + ": no " + options.random_algorithm + " run");
        continue;
      }
      std::vector<std::pair<std::size_t, double>> curve;
      for (const auto& p : learning_curve(**rand_it)) {
        curve.emplace_back(p.labels, p.mean_accuracy);
      }
      const std::size_t n0 = compute_n0(curve);
      const std::size_t initial = (*rand_it)->manifest.initial_labels;
      std::set<std::size_t> scheduled;
      if (n0 > initial) {
        for (const auto b : budget_schedule(initial, (*rand_it)->manifest.batch_size, n0)) {
          if (budgets.contains(b)) {
            scheduled.insert(b);
          }
        }
      }
      budgets = std::move(scheduled);
    }
    if (budgets.empty()) {
      out.warnings.push_back("skipped " + group + ": no comparable budgets");
      continue;
    }

    const auto& m0 = members.front()->manifest;
    for (const auto budget : budgets) {
      SettingResult setting{{m0.dataset, m0.batch_size, m0.architecture, budget}, {}};
      for (const auto* run : members) {
        const auto acc = accuracies_at(*run, budget);
        if (acc.empty()) {
          out.warnings.push_back(run->manifest.selector + " lacks budget " +
                                 std::to_string(budget) + " in some repetition of " + group);
          continue;
        }
        std::vector<double> errors;
        for (const double a : acc) {
          errors.push_back(1.0 - a);
        }
        setting.errors.emplace(run->manifest.selector, std::move(errors));
      }
      out.settings.push_back(std::move(setting));
    }
  }
  return out;
}

std::vector<CurvePoint> learning_curve(const RunRecord& run) {
  std::vector<CurvePoint> out;
  for (const auto budget : logged_budgets(run)) {
    std::vector<double> acc;
    for (const auto& rep : run.repetitions) {
      for (const auto& r : rep) {
        if (r.labels == budget) {
          acc.push_back(r.test_accuracy);
        }
      }
    }
    CurvePoint p;
    p.labels = budget;
    p.count = acc.size();
    for (const double a : acc) {
      p.mean_accuracy += a;
    }
    p.mean_accuracy /= static_cast<double>(acc.size());
    if (acc.size() > 1) {
      double ss = 0.0;
      for (const double a : acc) {
        ss += (a - p.mean_accuracy) * (a - p.mean_accuracy);
      }
      p.std_error = std::sqrt(ss / static_cast<double>(acc.size() - 1)) /
                    std::sqrt(static_cast<double>(acc.size()));
    }
    out.push_back(p);
  }
  return out;
}

std::vector<DiagnosticsPoint> diagnostics_summary(const RunRecord& run) {
  std::map<std::size_t, DiagnosticsPoint> by_round;
  std::map<std::size_t, std::size_t> finite_counts;
  for (const auto& rep : run.repetitions) {
    for (const auto& r : rep) {
      if (std::isnan(r.mean_norm)) {
        continue;  // no batch was selected in this round
      }
      auto& p = by_round[r.round];
      p.round = r.round;
      p.labels = r.labels;
      ++p.count;
      p.mean_norm += r.mean_norm;
      p.mean_selection_seconds += r.selection_seconds;
      if (std::isinf(r.log_gram_det) && r.log_gram_det < 0) {
        ++p.singular_batches;
      } else {
        p.mean_log_gram_det += r.log_gram_det;
        ++finite_counts[r.round];
      }
    }
  }
  std::vector<DiagnosticsPoint> out;
  for (auto& [round, p] : by_round) {
    const auto finite = finite_counts[round];
    p.mean_log_gram_det = finite > 0 ? p.mean_log_gram_det / static_cast<double>(finite)
                                     : -std::numeric_limits<double>::infinity();
    p.mean_norm /= static_cast<double>(p.count);
    p.mean_selection_seconds /= static_cast<double>(p.count);
    out.push_back(p);
  }
  return out;
}

void write_comparison(const std::filesystem::path& out_dir, const Comparison& comparison,
                      std::span<const RunRecord> runs, const CompareOptions& options) {
  std::filesystem::create_directories(out_dir);

  const auto matrix = penalty_matrix(comparison.settings, comparison.algorithms);
  {
    auto os = open_out(out_dir / "penalty_matrix.csv");
    os << "winner";
    for (const auto& a : matrix.algorithms) {
      os << ',' << a;
    }
    os << '\n';
    for (std::size_t i = 0; i < matrix.algorithms.size(); ++i) {
      os << matrix.algorithms[i];
      for (const double v : matrix.entries[i]) {
        os << ',' << format_double(v);
      }
      os << '\n';
    }
    os << "column_average";
    for (const double v : matrix.column_averages()) {
      os << ',' << format_double(v);
    }
    os << '\n';
  }

  const auto cdf = normalized_error_cdf(comparison.settings, options.random_algorithm);
  {
    auto os = open_out(out_dir / "ner_cdf.csv");
    os << "algorithm,normalized_error,cumulative_weight,total_weight\n";
    for (const auto& [algorithm, curve] : cdf.curves) {
      for (const auto& p : curve) {
        os << algorithm << ',' << format_double(p.x) << ',' << format_double(p.cumulative_weight)
           << ',' << format_double(cdf.total_weight) << '\n';
      }
    }
  }

  {
    auto os = open_out(out_dir / "settings.csv");
    os << "dataset,batch_size,architecture,budget,algorithm,mean_error,repetitions\n";
    for (const auto& s : comparison.settings) {
      for (const auto& [algorithm, errors] : s.errors) {
        double mean = 0.0;
        for (const double e : errors) {
          mean += e;
        }
        mean /= static_cast<double>(errors.size());
        os << s.key.dataset << ',' << s.key.batch_size << ',' << s.key.architecture << ','
           << s.key.budget << ',' << algorithm << ',' << format_double(mean) << ','
           << errors.size() << '\n';
      }
    }
  }

  {
    auto os = open_out(out_dir / "learning_curves.csv");
    os << "dataset,batch_size,architecture,algorithm,labels,mean_accuracy,std_error,repetitions\n";
    for (const auto& run : runs) {
      const auto& m = run.manifest;
      for (const auto& p : learning_curve(run)) {
        os << m.dataset << ',' << m.batch_size << ',' << m.architecture << ',' << m.selector << ','
           << p.labels << ',' << format_double(p.mean_accuracy) << ','
           << format_double(p.std_error) << ',' << p.count << '\n';
      }
    }
  }

  {
    auto os = open_out(out_dir / "warnings.txt");
    for (const auto& w : comparison.warnings) {
      os << w << '\n';
    }
    for (const auto& w : cdf.warnings) {
      os << w << '\n';
    }
  }
}

void write_diagnostics(const std::filesystem::path& out_path, const RunRecord& run) {
  if (out_path.has_parent_path()) {
    std::filesystem::create_directories(out_path.parent_path());
  }
  auto os = open_out(out_path);
  os << "algorithm,round,labels,mean_log_gram_det,singular_batches,mean_norm,"
        "mean_sel_time_s,repetitions\n";
  for (const auto& p : diagnostics_summary(run)) {
    os << run.manifest.selector << ',' << p.round << ',' << p.labels << ','
       << format_double(p.mean_log_gram_det) << ',' << p.singular_batches << ','
       << format_double(p.mean_norm) << ',' << format_double(p.mean_selection_seconds) << ','
       << p.count << '\n';
  }
}

}  // namespace badge
