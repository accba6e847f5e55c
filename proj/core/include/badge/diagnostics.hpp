#pragma once

#include <cstddef>
#include <span>

#include "badge/types.hpp"

namespace badge {

/// Diversity and magnitude of one selected batch of embeddings.
struct BatchDiagnostics {
  double log_gram_det = 0.0;  // -infinity when the batch Gram matrix is singular
  double mean_norm = 0.0;
  std::size_t batch_size = 0;
};

/// log det(G G^T) for the B x B Gram matrix of the rows of `embeddings`.
double log_gram_det(const Matrix& embeddings);

/// Mean Euclidean norm of the rows.
double mean_embedding_norm(const Matrix& embeddings);

/// Diagnostics for the given rows of `embeddings`.
BatchDiagnostics batch_diagnostics(const Matrix& embeddings, std::span<const std::size_t> rows);

}  // namespace badge
