#pragma once

#include <Eigen/Core>

namespace pcad::ggd {

/// Eigen-decomposition of a real symmetric 3x3 matrix.
struct SymmetricEigen3 {
  Eigen::Vector3d values;   // ascending
  Eigen::Matrix3d vectors;  // column i pairs with values(i), unit length
};

/// Cyclic Jacobi rotations until the off-diagonal mass underflows relative to
/// the diagonal. Only the upper triangle of `m` is read.
SymmetricEigen3 eigen_symmetric3(const Eigen::Matrix3d& m);

}  // namespace pcad::ggd
