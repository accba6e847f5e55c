#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "badge/al_loop.hpp"

namespace badge {

/// Shortest round-trip text for a double; infinities and NaN are written as
/// "inf", "-inf" and "nan".
std::string format_double(double value);
double parse_double_token(std::string_view token);

/// Column order of a results file.
inline constexpr std::string_view kResultsHeader =
    "rep,round,labels,test_accuracy,sel_time_s,log_gram_det,mean_norm,metadata";

struct ResultRow {
  std::size_t rep = 0;
  RoundLog log;
};

/// Writes one repetition's rounds to `path` (replacing any previous file).
void write_results(const std::filesystem::path& path, std::size_t rep,
                   std::span<const RoundLog> rounds);

/// Exact inverse of write_results. The metadata column is optional; the other
/// seven are required (SchemaError otherwise).
std::vector<ResultRow> read_results(const std::filesystem::path& path);

/// Enough to regenerate every figure from disk and to rerun bit-identically.
struct RunManifest {
  std::string config_json;  // normalized config snapshot
  std::string dataset;
  std::string selector;
  std::string architecture = "mlp";
  std::size_t initial_labels = 0;
  std::size_t batch_size = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> result_files;  // relative to the manifest directory
  std::vector<bool> truncated;
  std::string software_version;
  std::string started_at;  // empty when timing is omitted
  std::string finished_at;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest read_manifest(const std::filesystem::path& path);

std::string software_version();

}  // namespace badge
