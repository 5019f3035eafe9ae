#pragma once

#include <vector>

#include "pcad/nn/tensor.hpp"

namespace pcad::nn {

/// How a per-key geometric signal enters attention.
enum class Guidance {
  none,  // plain scaled dot-product attention
  bias,  // beta * B added to every logit of key j
  mask,  // keys with B_j below the mean of B are excluded
  gate,  // values of key j scaled by sigmoid(beta * B_j)
};

/// Per-key guidance signal: `values` is 1 x keys, `beta` is 1 x 1.
struct KeyGuidance {
  Guidance mode = Guidance::none;
  Tensor values;
  Tensor beta;
};

/// Multi-head attention over pre-projected Q (q x d), K (k x d), V (k x d).
/// Columns are split into `heads` equal slices; logits are scaled by
/// 1/sqrt(d / heads). When `weights_out` is given it receives the per-head
/// attention matrices (q x k each).
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads,
                            const KeyGuidance& guidance = {},
                            std::vector<Matrix>* weights_out = nullptr);

/// Numerically stable row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace pcad::nn
