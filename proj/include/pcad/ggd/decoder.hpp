#pragma once

#include <string>
#include <vector>

#include "pcad/ggd/geometry.hpp"
#include "pcad/nn/attention.hpp"
#include "pcad/nn/layers.hpp"

namespace pcad::ggd {

using nn::Matrix;
using nn::Tensor;

/// One attention branch: its own Q/K/V projections and output projection.
struct AttentionBranch {
  nn::Linear wq, wk, wv, wo;
};

/// Two independent branches whose outputs are concatenated (g x 2d) and
/// mapped back to g x d by a GELU feed-forward network.
struct DecoderBlock {
  AttentionBranch branches[2];
  nn::Linear ffn1;
  nn::Linear ffn2;
};

struct GgdParams {
  int width = 0;
  int heads = 8;
  nn::Guidance guidance = nn::Guidance::bias;
  nn::Mlp2 bias_mlp;          // standardized (v_norm, v_curv) -> scalar
  nn::Linear query_from_z;    // d_z -> d
  nn::Mlp2 query_position;    // center xyz -> d
  std::vector<DecoderBlock> blocks;
  Tensor beta;                // 1 x 1

  struct Shape {
    int width = 64;
    int embed_dim = 128;
    int heads = 8;
    int layers = 1;
    int ffn_hidden = 128;
    int bias_hidden = 16;
    double beta = 1.0;
    nn::Guidance guidance = nn::Guidance::bias;
  };
  static GgdParams create(nn::ParamStore& store, const std::string& prefix, const Shape& shape,
                          Rng& rng);
};

std::string to_string(nn::Guidance g);
nn::Guidance guidance_from_string(const std::string& s);

/// g x 2 matrix of (v_norm, v_curv) standardized per column to zero mean and
/// unit variance (variance floored at 1e-8).
Matrix standardized_variations(const std::vector<GeoDescriptor>& descriptors);

/// MLP over standardized descriptors; returns 1 x g.
Tensor geo_bias(const Matrix& standardized, const nn::Mlp2& mlp);
Tensor geo_bias(const std::vector<GeoDescriptor>& descriptors, const GgdParams& params);

/// softmax(Q K^T / sqrt(d_head) + beta * B) V over `heads` heads.
Tensor biased_attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& bias,
                        const Tensor& beta, int heads = 8,
                        std::vector<Matrix>* weights_out = nullptr);

/// Reconstructs g tokens. The query rows are the projected global token
/// broadcast to g slots plus positional embeddings of the centers; keys and
/// values are the encoded base sequence.
Tensor decode(const Tensor& z, const Tensor& encoded_base, const Tensor& bias, const Matrix& centers,
              const GgdParams& params);

/// (1/g) sum_j ||recon_j - target_j||^2. The target is treated as constant.
Tensor rec_loss(const Tensor& reconstruction, const Tensor& target);

/// c3l + rec with unit weights.
Tensor total_loss(const Tensor& c3l, const Tensor& rec);

}  // namespace pcad::ggd
