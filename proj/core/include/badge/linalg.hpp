#pragma once

#include <span>

#include "badge/types.hpp"

namespace badge {

/// Log-determinant of a symmetric positive semi-definite matrix via an
/// unpivoted Cholesky factorization. Returns -infinity as soon as a pivot is
/// non-positive, where a pivot counts as non-positive once it falls to the
/// rounding level of its diagonal entry (n * eps * a_jj).
///
/// Only the lower triangle of `a` is read. `a` must be square.
double cholesky_log_det(const Matrix& a);

/// Same as above, overwriting the lower triangle of `scratch` with the factor.
/// Avoids allocation in tight loops.
double cholesky_log_det_inplace(Matrix& scratch);

/// Gram matrix of the selected rows: G_ij = <x_rows[i], x_rows[j]>.
Matrix gram_of_rows(const Matrix& points, std::span<const std::size_t> rows);

}  // namespace badge
