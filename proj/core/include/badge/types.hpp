#pragma once

#include <Eigen/Dense>

namespace badge {

/// One example per row. Used for features, penultimate activations and
/// gradient embeddings alike.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

}  // namespace badge
