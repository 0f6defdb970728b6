#pragma once

#include <Eigen/Dense>

namespace vrc {

// Rows are time samples, columns are dimensions.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace vrc
