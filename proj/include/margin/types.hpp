#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace margin {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Row-major so that row iteration order (and therefore every row reduction)
// is fixed by the storage layout.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

}  // namespace margin
