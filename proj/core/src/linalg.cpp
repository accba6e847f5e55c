#include "badge/linalg.hpp"

#include <cmath>
#include <limits>

#include "badge/errors.hpp"

namespace badge {

double cholesky_log_det_inplace(Matrix& a) {
  if (a.rows() != a.cols()) {
    throw InvalidInput("cholesky_log_det: matrix is not square");
  }
  const Eigen::Index n = a.rows();
  const double tol_factor = static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  double log_det = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double diag = a(j, j);
    const auto row_j = a.row(j).head(j);
    const double pivot = diag - row_j.squaredNorm();
    if (!(pivot > tol_factor * diag) || !std::isfinite(pivot)) {
      return -std::numeric_limits<double>::infinity();
    }
    const double l_jj = std::sqrt(pivot);
    log_det += std::log(pivot);
    a(j, j) = l_jj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      a(i, j) = (a(i, j) - a.row(i).head(j).dot(row_j)) / l_jj;
    }
  }
  return log_det;
}

double cholesky_log_det(const Matrix& a) {
  Matrix scratch = a;
  return cholesky_log_det_inplace(scratch);
}

Matrix gram_of_rows(const Matrix& points, std::span<const std::size_t> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto xi = points.row(static_cast<Eigen::Index>(rows[i]));
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = xi.dot(points.row(static_cast<Eigen::Index>(rows[j])));
      gram(i, j) = v;
      gram(j, i) = v;
    }
  }
  return gram;
}

}  // namespace badge
