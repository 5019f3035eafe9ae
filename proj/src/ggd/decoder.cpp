#include "pcad/ggd/decoder.hpp"

#include <cmath>

#include "pcad/common/error.hpp"
#include "pcad/nn/ops.hpp"

namespace pcad::ggd {

std::string to_string(nn::Guidance g) {
  switch (g) {
    case nn::Guidance::none: return "none";
    case nn::Guidance::bias: return "bias";
    case nn::Guidance::mask: return "mask";
    case nn::Guidance::gate: return "gate";
  }
  return "bias";
}

nn::Guidance guidance_from_string(const std::string& s) {
  if (s == "none") return nn::Guidance::none;
  if (s == "bias") return nn::Guidance::bias;
  if (s == "mask") return nn::Guidance::mask;
  if (s == "gate") return nn::Guidance::gate;
  throw ConfigError("unknown guidance strategy '" + s + "'");
}

GgdParams GgdParams::create(nn::ParamStore& store, const std::string& prefix, const Shape& s,
                            Rng& rng) {
  if (s.layers < 1) throw InvalidArgument("decoder needs at least one layer");
  if (s.width % s.heads != 0) throw InvalidArgument("decoder width must be divisible by heads");
  const auto init = nn::Init::trunc_normal_002;
  GgdParams p;
  p.width = s.width;
  p.heads = s.heads;
  p.guidance = s.guidance;
  p.bias_mlp = nn::Mlp2::create(store, prefix + ".bias_mlp", 2, s.bias_hidden, 1, nn::Init::he_normal, rng);
  p.query_from_z = nn::Linear::create(store, prefix + ".query_z", s.embed_dim, s.width, init, rng);
  p.query_position = nn::Mlp2::create(store, prefix + ".query_pos", 3, s.width, s.width, init, rng);
  for (int l = 0; l < s.layers; ++l) {
    const std::string lp = prefix + ".block" + std::to_string(l);
    DecoderBlock b;
    for (int br = 0; br < 2; ++br) {
      const std::string bp = lp + ".branch" + std::to_string(br);
      b.branches[br].wq = nn::Linear::create(store, bp + ".wq", s.width, s.width, init, rng);
      b.branches[br].wk = nn::Linear::create(store, bp + ".wk", s.width, s.width, init, rng);
      b.branches[br].wv = nn::Linear::create(store, bp + ".wv", s.width, s.width, init, rng);
      b.branches[br].wo = nn::Linear::create(store, bp + ".wo", s.width, s.width, init, rng);
    }
    b.ffn1 = nn::Linear::create(store, lp + ".ffn.fc1", 2 * s.width, s.ffn_hidden, init, rng);
    b.ffn2 = nn::Linear::create(store, lp + ".ffn.fc2", s.ffn_hidden, s.width, init, rng);
    p.blocks.push_back(std::move(b));
  }
  p.beta = store.add(prefix + ".beta", Matrix::Constant(1, 1, s.beta), false);
  return p;
}

Matrix standardized_variations(const std::vector<GeoDescriptor>& descriptors) {
  const Eigen::Index g = static_cast<Eigen::Index>(descriptors.size());
  if (g == 0) throw InvalidArgument("standardized_variations: no descriptors");
  Matrix v(g, 2);
  for (Eigen::Index i = 0; i < g; ++i) {
    v(i, 0) = descriptors[static_cast<std::size_t>(i)].v_norm;
    v(i, 1) = descriptors[static_cast<std::size_t>(i)].v_curv;
  }
  if (!v.allFinite()) throw InvalidInput("standardized_variations: non-finite descriptors");
  for (int c = 0; c < 2; ++c) {
    const double mean = v.col(c).mean();
    const double var = (v.col(c).array() - mean).square().mean();
    const double sd = std::sqrt(std::max(var, 1e-8));
    v.col(c) = (v.col(c).array() - mean) / sd;
  }
  return v;
}

Tensor geo_bias(const Matrix& standardized, const nn::Mlp2& mlp) {
  if (standardized.cols() != 2) throw InvalidArgument("geo_bias: expected g x 2 descriptors");
  return nn::transpose(mlp(Tensor::constant(standardized)));
}

Tensor geo_bias(const std::vector<GeoDescriptor>& descriptors, const GgdParams& params) {
  return geo_bias(standardized_variations(descriptors), params.bias_mlp);
}

Tensor biased_attention(const Tensor& q, const Tensor& k, const Tensor& v, const Tensor& bias,
                        const Tensor& beta, int heads, std::vector<Matrix>* weights_out) {
  nn::KeyGuidance guidance{nn::Guidance::bias, bias, beta};
  return nn::multi_head_attention(q, k, v, heads, guidance, weights_out);
}

Tensor decode(const Tensor& z, const Tensor& encoded_base, const Tensor& bias, const Matrix& centers,
              const GgdParams& params) {
  const Eigen::Index g = encoded_base.rows();
  if (encoded_base.cols() != params.width) throw InvalidArgument("decode: token width mismatch");
  if (centers.rows() != g || centers.cols() != 3) throw InvalidArgument("decode: centers must be g x 3");
  if (z.rows() != 1) throw InvalidArgument("decode: z must be a single row");

  Tensor pos = params.query_position(Tensor::constant(centers));
  Tensor query = nn::add(nn::broadcast_rows(params.query_from_z(z), g), pos);
  nn::KeyGuidance guidance;
  guidance.mode = params.guidance;
  if (params.guidance != nn::Guidance::none) {
    if (!bias.defined() || bias.rows() != 1 || bias.cols() != g) {
      throw InvalidArgument("decode: geometric bias must be 1 x g");
    }
    guidance.values = bias;
    guidance.beta = params.beta;
  }
  for (const DecoderBlock& b : params.blocks) {
    Tensor outs[2];
    for (int br = 0; br < 2; ++br) {
      const AttentionBranch& a = b.branches[br];
      Tensor attn = nn::multi_head_attention(a.wq(query), a.wk(encoded_base), a.wv(encoded_base),
                                             params.heads, guidance);
      outs[br] = a.wo(attn);
    }
    query = b.ffn2(nn::gelu(b.ffn1(nn::concat_cols({outs[0], outs[1]}))));
  }
  return query;
}

Tensor rec_loss(const Tensor& reconstruction, const Tensor& target) {
  return nn::mean_squared_row_error(reconstruction, target.detach());
}

Tensor total_loss(const Tensor& c3l, const Tensor& rec) { return nn::add(c3l, rec); }

}  // namespace pcad::ggd
