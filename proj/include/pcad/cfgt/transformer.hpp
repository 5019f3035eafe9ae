#pragma once

#include <string>
#include <vector>

#include "pcad/nn/layers.hpp"

namespace pcad::cfgt {

using nn::Tensor;

/// Pre-norm transformer block: x + MHSA(LN(x)), then x + FFN(LN(x)).
struct EncoderBlock {
  nn::LayerNorm norm1;
  nn::Linear wq, wk, wv, wo;
  nn::LayerNorm norm2;
  nn::Linear ff1, ff2;
};

/// Stack of pre-norm blocks without positional terms and without a final
/// norm, so zeroed output projections make the whole stack the identity.
class TransformerEncoder {
 public:
  static TransformerEncoder create(nn::ParamStore& store, const std::string& prefix, int layers,
                                   int heads, int width, int ffn_hidden, Rng& rng);

  Tensor forward(const Tensor& x) const;
  int width() const { return width_; }
  int heads() const { return heads_; }
  const std::vector<EncoderBlock>& blocks() const { return blocks_; }
  /// Zeroes every residual-branch output projection (attention and FFN).
  void zero_residual_branches();

 private:
  std::vector<EncoderBlock> blocks_;
  int heads_ = 1;
  int width_ = 0;
};

}  // namespace pcad::cfgt
