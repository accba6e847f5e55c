#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "badge/al_loop.hpp"
#include "badge/dataset.hpp"

namespace badge {

/// Where the data comes from. `kind` is "synthetic", "csv" or "libsvm".
struct DatasetSpec {
  std::string kind = "synthetic";
  std::string name;  // defaults to the file stem or "gaussian_mixture"
  std::string path;
  std::string label_column = "last";
  bool has_header = true;
  std::size_t num_features = 0;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 0;
  // synthetic only
  std::size_t num_classes = 3;
  std::size_t input_dim = 16;
  std::size_t n = 10000;
  double separation = 1.0;
  std::uint64_t seed = 0;
};

struct RunConfig {
  DatasetSpec dataset;
  ExperimentConfig experiment;
};

/// Parses the JSON config format documented in README.md. Unknown keys are
/// rejected.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Normalized JSON with every key spelled out.
std::string to_json(const RunConfig& config);

Dataset load_dataset(const DatasetSpec& spec);

}  // namespace badge
