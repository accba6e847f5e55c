#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "badge/types.hpp"

namespace badge {

/// Labeled examples plus a train/test split. The train split is the
/// active-learning pool; its labels are only read through the oracle.
struct Dataset {
  std::string name;
  std::string provenance;
  Matrix features;                       // n x d_in
  std::vector<std::size_t> labels;       // n entries in [0, num_classes)
  std::size_t num_classes = 0;
  std::vector<std::string> class_names;  // original label tokens, by dense id
  std::vector<std::size_t> train_ids;    // sorted
  std::vector<std::size_t> test_ids;     // sorted

  std::size_t size() const { return labels.size(); }
  std::size_t input_dim() const { return static_cast<std::size_t>(features.cols()); }

  Matrix rows(std::span<const std::size_t> ids) const;
  std::vector<std::size_t> labels_of(std::span<const std::size_t> ids) const;

  /// Finite features, labels in range, every class in the train split, and a
  /// disjoint, covering split.
  void validate() const;
};

struct SplitOptions {
  double test_fraction = 0.2;
  std::uint64_t seed = 0;
};

/// Stratified split: for each class, floor(count * test_fraction) of its
/// examples (chosen by the seeded stream) go to test, the rest to train.
void assign_split(Dataset& dataset, const SplitOptions& options);

/// Standardizes each column with the mean and population variance of the
/// train split; zero-variance columns become all zeros.
void standardize_on_train(Dataset& dataset);

/// Comma-separated values. `label_column` is a header name (when
/// `has_header`), a 0-based column index, or "last". Labels are re-indexed
/// densely in first-appearance order. Features are standardized on the
/// train split.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column,
                 bool has_header, const SplitOptions& split = {});

/// Sparse "label index:value ..." lines with 1-based feature indices.
/// `num_features` of 0 infers the dimension from the largest index.
Dataset load_libsvm(const std::filesystem::path& path, std::size_t num_features = 0,
                    const SplitOptions& split = {});

/// K spherical unit-variance Gaussians with means at separation * u_k for
/// random unit directions u_k; label of example i is i mod K. Not standardized.
Dataset synth_gaussian_mixture(std::size_t num_classes, std::size_t input_dim, std::size_t n,
                               double separation, std::uint64_t rng_seed,
                               double test_fraction = 0.2);

}  // namespace badge
