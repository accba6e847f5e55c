#include "badge/diagnostics.hpp"

#include <numeric>
#include <vector>

#include "badge/errors.hpp"
#include "badge/linalg.hpp"

namespace badge {

double log_gram_det(const Matrix& embeddings) {
  if (embeddings.rows() == 0) {
    throw InvalidInput("log_gram_det: empty batch");
  }
  Matrix gram = embeddings * embeddings.transpose();
  return cholesky_log_det_inplace(gram);
}

double mean_embedding_norm(const Matrix& embeddings) {
  if (embeddings.rows() == 0) {
    throw InvalidInput("mean_embedding_norm: empty batch");
  }
  return embeddings.rowwise().norm().mean();
}

BatchDiagnostics batch_diagnostics(const Matrix& embeddings, std::span<const std::size_t> rows) {
  Matrix batch(static_cast<Eigen::Index>(rows.size()), embeddings.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    batch.row(static_cast<Eigen::Index>(i)) = embeddings.row(static_cast<Eigen::Index>(rows[i]));
  }
  return {log_gram_det(batch), mean_embedding_norm(batch), rows.size()};
}

}  // namespace badge
