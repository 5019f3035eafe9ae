#include "pcad/cfgt/transformer.hpp"

#include "pcad/common/error.hpp"
#include "pcad/nn/attention.hpp"
#include "pcad/nn/ops.hpp"

namespace pcad::cfgt {

TransformerEncoder TransformerEncoder::create(nn::ParamStore& store, const std::string& prefix,
                                              int layers, int heads, int width, int ffn_hidden,
                                              Rng& rng) {
  if (layers < 0 || heads < 1 || width % heads != 0) {
    throw InvalidArgument("transformer: width must be divisible by heads");
  }
  TransformerEncoder enc;
  enc.heads_ = heads;
  enc.width_ = width;
  const auto init = nn::Init::trunc_normal_002;
  for (int l = 0; l < layers; ++l) {
    const std::string p = prefix + "." + std::to_string(l);
    EncoderBlock b;
    b.norm1 = nn::LayerNorm::create(store, p + ".norm1", width);
    b.wq = nn::Linear::create(store, p + ".attn.wq", width, width, init, rng);
    b.wk = nn::Linear::create(store, p + ".attn.wk", width, width, init, rng);
    b.wv = nn::Linear::create(store, p + ".attn.wv", width, width, init, rng);
    b.wo = nn::Linear::create(store, p + ".attn.wo", width, width, init, rng);
    b.norm2 = nn::LayerNorm::create(store, p + ".norm2", width);
    b.ff1 = nn::Linear::create(store, p + ".ffn.fc1", width, ffn_hidden, init, rng);
    b.ff2 = nn::Linear::create(store, p + ".ffn.fc2", ffn_hidden, width, init, rng);
    enc.blocks_.push_back(std::move(b));
  }
  return enc;
}

Tensor TransformerEncoder::forward(const Tensor& x) const {
  if (x.cols() != width_) {
    throw InvalidArgument("transformer: input width " + std::to_string(x.cols()) +
                          " does not match " + std::to_string(width_));
  }
  Tensor h = x;
  for (const EncoderBlock& b : blocks_) {
    Tensor n1 = b.norm1(h);
    Tensor attn = nn::multi_head_attention(b.wq(n1), b.wk(n1), b.wv(n1), heads_);
    h = nn::add(h, b.wo(attn));
    Tensor n2 = b.norm2(h);
    h = nn::add(h, b.ff2(nn::gelu(b.ff1(n2))));
  }
  return h;
}

void TransformerEncoder::zero_residual_branches() {
  for (EncoderBlock& b : blocks_) {
    b.wo.weight.mutable_value().setZero();
    b.wo.bias.mutable_value().setZero();
    b.ff2.weight.mutable_value().setZero();
    b.ff2.bias.mutable_value().setZero();
  }
}

}  // namespace pcad::cfgt
