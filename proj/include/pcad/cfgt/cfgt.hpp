#pragma once

#include <optional>
#include <string>

#include "pcad/cfgt/transformer.hpp"

namespace pcad::cfgt {

using nn::Matrix;

/// How the instance-level representation is summarized before the heads.
enum class GlobalTokenMode {
  cfgt,  // [mean(base), mean(coarse), mean(fine), encoded ACT], width 4d
  act,   // encoded ACT only, width d
  max,   // column max of the encoded base sequence, width d
  mean,  // column mean of the encoded base sequence, width d
};

int global_width(GlobalTokenMode mode, int d);
std::string to_string(GlobalTokenMode mode);
GlobalTokenMode global_token_mode_from_string(const std::string& s);

/// Learnable context token, shared transformer, classifier and projector.
struct CfgtParams {
  int width = 0;
  int embed_dim = 0;
  int categories = 0;
  GlobalTokenMode mode = GlobalTokenMode::cfgt;
  Tensor act_token;  // 1 x d
  TransformerEncoder encoder;
  nn::Linear classifier;      // global -> C
  nn::LayerNorm proj_norm;    // applied to the global vector first
  nn::Linear proj_fc1;        // global -> hidden
  nn::Linear proj_fc2;        // hidden -> d_z

  struct Shape {
    int width = 64;
    int embed_dim = 128;
    int categories = 2;
    int layers = 4;
    int heads = 8;
    int ffn_hidden = 128;
    int proj_hidden = 128;
    GlobalTokenMode mode = GlobalTokenMode::cfgt;
  };
  static CfgtParams create(nn::ParamStore& store, const std::string& prefix, const Shape& shape,
                           Rng& rng);
};

struct EncodedSequences {
  Tensor fine;   // g x d
  Tensor base;   // g x d, ACT position removed
  Tensor coarse; // g x d
  Tensor act;    // 1 x d, encoded ACT
};

/// Runs the shared encoder on fine and coarse directly and on [ACT; base].
EncodedSequences encode_sequences(const Tensor& fine, const Tensor& base, const Tensor& coarse,
                                  const CfgtParams& params);
/// Base-only variant (multi-resolution branch disabled): [ACT; base].
EncodedSequences encode_base_only(const Tensor& base, const CfgtParams& params);

/// (1/g) sum_m sum_{r in fine, coarse} [1 - cos(base_m, r_m)]. A pair with a
/// zero-norm token contributes exactly 1 and no gradient; the number of such
/// pairs is written to `degenerate_pairs` when given.
Tensor cosine_alignment_loss(const Tensor& base, const Tensor& fine, const Tensor& coarse,
                             int* degenerate_pairs = nullptr);

/// concat([mean(base), mean(coarse), mean(fine), act]).
Tensor fuse_global(const Tensor& fine, const Tensor& base, const Tensor& coarse, const Tensor& act);

/// Global vector for the configured mode.
Tensor global_representation(const EncodedSequences& seq, GlobalTokenMode mode);

Tensor classify(const Tensor& global, const CfgtParams& params);

/// Cross-entropy of a 1 x C logit row against a 1-based label.
Tensor cross_entropy(const Tensor& logits, int label);

/// Proj(global) l2-normalized to a 1 x d_z row. Throws DegenerateNorm when
/// the pre-normalization vector is zero.
Tensor project(const Tensor& global, const CfgtParams& params);

/// Unit-norm embedding with its category label.
struct GlobalToken {
  Eigen::RowVectorXd z;
  int category = 0;
};

}  // namespace pcad::cfgt
