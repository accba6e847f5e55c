#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "badge/types.hpp"

namespace badge {

/// Model output for one pool example: softmax probabilities p (length K) and
/// penultimate activations z (length d).
struct PredictionRecord {
  std::vector<double> probs;
  std::vector<double> features;
  std::size_t example_id = 0;
};

/// Throws InvalidInput unless probs are finite, non-negative and sum to 1
/// within 1e-6, and features are finite.
void validate(const PredictionRecord& record);

/// argmax_i p_i, lowest index on ties.
std::size_t hypothetical_label(std::span<const double> probs);

/// Last-layer cross-entropy gradient for a hallucinated label: K blocks of
/// length d, block i equal to (p_i - [label == i]) * z.
class GradientEmbedding {
 public:
  GradientEmbedding(std::size_t num_classes, std::size_t dim, std::vector<double> values);

  std::size_t num_classes() const noexcept { return num_classes_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> block(std::size_t class_index) const;

  double norm_sq() const noexcept { return norm_sq_; }

 private:
  std::size_t num_classes_;
  std::size_t dim_;
  std::vector<double> values_;
  double norm_sq_;
};

/// Writes the K*d gradient of the cross-entropy loss w.r.t. the output weight
/// matrix for the given label into `out` (row-major, one block per class).
/// Shared by the embedding path and the MLP's output-layer gradient.
void output_gradient_into(std::span<const double> probs, std::size_t label,
                          std::span<const double> features, std::span<double> out);

/// Gradient embedding under the hypothetical label. The expected K and d are
/// checked against the record.
GradientEmbedding gradient_embedding(const PredictionRecord& record, std::size_t num_classes,
                                     std::size_t dim);
GradientEmbedding gradient_embedding(const PredictionRecord& record);

/// Closed-form squared norm of the embedding for label y:
/// (sum_i p_i^2 + 1 - 2 p_y) * ||z||^2.
double grad_norm_sq_for_label(std::span<const double> probs, std::size_t label, double z_norm_sq);

/// Binary logistic regression with labels in {-1, +1} and
/// p(y | x) = sigmoid(y w.x). The hallucinated label is +1 iff p(+1 | x) > 1/2.
int binary_hallucinated_label(std::span<const double> w, std::span<const double> x);

/// Gradient of ln(1 + exp(-y w.x)) with respect to w: (1 - p(y | x)) * (-y x).
std::vector<double> binary_logistic_gradient(std::span<const double> w, std::span<const double> x,
                                             int label);

/// Stacks the hypothetical-label embeddings of all records, one per row.
Matrix embedding_matrix(std::span<const PredictionRecord> records);

}  // namespace badge
