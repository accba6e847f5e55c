#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "badge/results_io.hpp"
#include "badge/stats.hpp"

namespace badge {

/// A finished run loaded back from its manifest and per-repetition files.
struct RunRecord {
  std::filesystem::path manifest_path;
  RunManifest manifest;
  std::vector<std::vector<RoundLog>> repetitions;
};

RunRecord load_run(const std::filesystem::path& manifest_path);

/// Every manifest.json below `root` (or `root` itself if it is a manifest).
std::vector<std::filesystem::path> find_manifests(const std::filesystem::path& root);

struct CompareOptions {
  std::string random_algorithm = "random";
  /// Use every budget logged by all algorithms instead of the schedule
  /// derived from the random baseline's n0.
  bool all_budgets = false;
};

struct Comparison {
  std::vector<std::string> algorithms;  // sorted
  std::vector<SettingResult> settings;
  std::vector<std::string> warnings;
};

/// Groups runs by (dataset, batch size, architecture), picks budgets, and
/// collects paired test errors (1 - accuracy) per budget.
Comparison build_comparison(std::span<const RunRecord> runs, const CompareOptions& options = {});

struct CurvePoint {
  std::size_t labels = 0;
  double mean_accuracy = 0.0;
  double std_error = 0.0;
  std::size_t count = 0;
};

/// Mean test accuracy and its standard error across repetitions per budget.
std::vector<CurvePoint> learning_curve(const RunRecord& run);

struct DiagnosticsPoint {
  std::size_t round = 0;
  std::size_t labels = 0;
  double mean_log_gram_det = 0.0;  // over repetitions with a finite value
  std::size_t singular_batches = 0;
  double mean_norm = 0.0;
  double mean_selection_seconds = 0.0;
  std::size_t count = 0;
};

/// Per-round batch diagnostics averaged across repetitions; rounds without a
/// selection are omitted.
std::vector<DiagnosticsPoint> diagnostics_summary(const RunRecord& run);

/// penalty_matrix.csv, ner_cdf.csv, settings.csv, learning_curves.csv.
void write_comparison(const std::filesystem::path& out_dir, const Comparison& comparison,
                      std::span<const RunRecord> runs, const CompareOptions& options = {});

/// diagnostics.csv for one run.
void write_diagnostics(const std::filesystem::path& out_path, const RunRecord& run);

}  // namespace badge
