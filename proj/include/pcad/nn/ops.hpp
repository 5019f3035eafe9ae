#pragma once

#include <vector>

#include "pcad/nn/tensor.hpp"

namespace pcad::nn {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
/// Adds a 1 x c row to every row of a.
Tensor add_row(const Tensor& a, const Tensor& row);
Tensor scale(const Tensor& a, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);

Tensor relu(const Tensor& a);
/// Exact (erf-based) GELU.
Tensor gelu(const Tensor& a);
Tensor sigmoid(const Tensor& a);

/// Row-wise layer normalization with affine gamma/beta (both 1 x c).
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = 1e-5);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, Eigen::Index start, Eigen::Index count);
/// Repeats a 1 x c row n times.
Tensor broadcast_rows(const Tensor& row, Eigen::Index n);

Tensor transpose(const Tensor& a);

Tensor mean_rows(const Tensor& a);
Tensor max_rows(const Tensor& a);
Tensor sum(const Tensor& a);

/// Divides each row by its l2 norm. Throws DegenerateNorm on a zero row.
Tensor l2_normalize_rows(const Tensor& a);

/// (1/rows) * sum of squared row differences.
Tensor mean_squared_row_error(const Tensor& pred, const Tensor& target);

}  // namespace pcad::nn
