#include "pcad/cfgt/cfgt.hpp"

#include <cmath>

#include "pcad/common/error.hpp"
#include "pcad/nn/ops.hpp"

namespace pcad::cfgt {

int global_width(GlobalTokenMode mode, int d) { return mode == GlobalTokenMode::cfgt ? 4 * d : d; }

std::string to_string(GlobalTokenMode mode) {
  switch (mode) {
    case GlobalTokenMode::cfgt: return "cfgt";
    case GlobalTokenMode::act: return "act";
    case GlobalTokenMode::max: return "max";
    case GlobalTokenMode::mean: return "mean";
  }
  return "cfgt";
}

GlobalTokenMode global_token_mode_from_string(const std::string& s) {
  if (s == "cfgt") return GlobalTokenMode::cfgt;
  if (s == "act") return GlobalTokenMode::act;
  if (s == "max") return GlobalTokenMode::max;
  if (s == "mean") return GlobalTokenMode::mean;
  throw ConfigError("unknown global token mode '" + s + "'");
}

CfgtParams CfgtParams::create(nn::ParamStore& store, const std::string& prefix, const Shape& s,
                              Rng& rng) {
  if (s.categories < 2) throw InvalidArgument("cfgt: at least two categories are required");
  CfgtParams p;
  p.width = s.width;
  p.embed_dim = s.embed_dim;
  p.categories = s.categories;
  p.mode = s.mode;
  p.act_token = store.add(prefix + ".act_token", nn::init_matrix(1, s.width, nn::Init::trunc_normal_002, rng), false);
  p.encoder = TransformerEncoder::create(store, prefix + ".enc", s.layers, s.heads, s.width, s.ffn_hidden, rng);
  const int gw = global_width(s.mode, s.width);
  p.classifier = nn::Linear::create(store, prefix + ".cls", gw, s.categories, nn::Init::trunc_normal_002, rng);
  p.proj_norm = nn::LayerNorm::create(store, prefix + ".proj.norm", gw);
  p.proj_fc1 = nn::Linear::create(store, prefix + ".proj.fc1", gw, s.proj_hidden, nn::Init::trunc_normal_002, rng);
  p.proj_fc2 = nn::Linear::create(store, prefix + ".proj.fc2", s.proj_hidden, s.embed_dim, nn::Init::trunc_normal_002, rng);
  return p;
}

EncodedSequences encode_sequences(const Tensor& fine, const Tensor& base, const Tensor& coarse,
                                  const CfgtParams& params) {
  const Eigen::Index d = params.width;
  if (fine.cols() != d || base.cols() != d || coarse.cols() != d) {
    throw InvalidArgument("encode_sequences: token width does not match d=" + std::to_string(d));
  }
  if (fine.rows() != base.rows() || coarse.rows() != base.rows()) {
    throw InvalidArgument("encode_sequences: sequences must share the group count");
  }
  EncodedSequences out = encode_base_only(base, params);
  out.fine = params.encoder.forward(fine);
  out.coarse = params.encoder.forward(coarse);
  return out;
}

EncodedSequences encode_base_only(const Tensor& base, const CfgtParams& params) {
  if (base.cols() != params.width) throw InvalidArgument("encode_base_only: token width mismatch");
  const Eigen::Index g = base.rows();
  Tensor with_act = nn::concat_rows({params.act_token, base});
  Tensor encoded = params.encoder.forward(with_act);
  EncodedSequences out;
  out.act = nn::slice_rows(encoded, 0, 1);
  out.base = nn::slice_rows(encoded, 1, g);
  return out;
}

Tensor cosine_alignment_loss(const Tensor& base, const Tensor& fine, const Tensor& coarse,
                             int* degenerate_pairs) {
  if (base.rows() != fine.rows() || base.rows() != coarse.rows() || base.cols() != fine.cols() ||
      base.cols() != coarse.cols()) {
    throw InvalidArgument("cosine_alignment_loss: shape mismatch");
  }
  const Eigen::Index g = base.rows();
  if (g == 0) throw InvalidArgument("cosine_alignment_loss: empty sequences");
  const Matrix& b = base.value();
  const Matrix* others[2] = {&fine.value(), &coarse.value()};
  double total = 0.0;
  int degenerate = 0;
  // Per pair: cosine, norms, and whether it is degenerate.
  Eigen::MatrixXd cosv(g, 2), nb(g, 1), nx(g, 2);
  Eigen::Matrix<bool, Eigen::Dynamic, 2> valid(g, 2);
  for (Eigen::Index m = 0; m < g; ++m) {
    nb(m, 0) = b.row(m).norm();
    for (int r = 0; r < 2; ++r) {
      nx(m, r) = others[r]->row(m).norm();
      valid(m, r) = nb(m, 0) > 0.0 && nx(m, r) > 0.0;
      if (valid(m, r)) {
        cosv(m, r) = b.row(m).dot(others[r]->row(m)) / (nb(m, 0) * nx(m, r));
        total += 1.0 - cosv(m, r);
      } else {
        cosv(m, r) = 0.0;
        total += 1.0;
        ++degenerate;
      }
    }
  }
  if (degenerate_pairs) *degenerate_pairs = degenerate;
  Matrix out(1, 1);
  out(0, 0) = total / static_cast<double>(g);
  Matrix bc = b, fc = fine.value(), cc = coarse.value();
  return Tensor::from_op(std::move(out), {base, fine, coarse},
                         [=](nn::Node& self) {
    const double s = -self.grad(0, 0) / static_cast<double>(g);
    const Matrix* xs[2] = {&fc, &cc};
    Matrix db = Matrix::Zero(g, bc.cols());
    Matrix dx[2] = {Matrix::Zero(g, bc.cols()), Matrix::Zero(g, bc.cols())};
    for (Eigen::Index m = 0; m < g; ++m) {
      for (int r = 0; r < 2; ++r) {
        if (!valid(m, r)) continue;
        const double c = cosv(m, r);
        const double inv = 1.0 / (nb(m, 0) * nx(m, r));
        db.row(m) += s * (xs[r]->row(m) * inv - c * bc.row(m) / (nb(m, 0) * nb(m, 0)));
        dx[r].row(m) += s * (bc.row(m) * inv - c * xs[r]->row(m) / (nx(m, r) * nx(m, r)));
      }
    }
    if (self.parents[0]->requires_grad) self.parents[0]->accumulate(db);
    if (self.parents[1]->requires_grad) self.parents[1]->accumulate(dx[0]);
    if (self.parents[2]->requires_grad) self.parents[2]->accumulate(dx[1]);
  });
}

Tensor fuse_global(const Tensor& fine, const Tensor& base, const Tensor& coarse, const Tensor& act) {
  if (fine.cols() != base.cols() || coarse.cols() != base.cols() || act.cols() != base.cols() ||
      act.rows() != 1) {
    throw InvalidArgument("fuse_global: inconsistent widths");
  }
  return nn::concat_cols({nn::mean_rows(base), nn::mean_rows(coarse), nn::mean_rows(fine), act});
}

Tensor global_representation(const EncodedSequences& seq, GlobalTokenMode mode) {
  switch (mode) {
    case GlobalTokenMode::cfgt:
      if (!seq.fine.defined() || !seq.coarse.defined()) {
        throw ConfigError("cfgt global token needs the fine and coarse sequences");
      }
      return fuse_global(seq.fine, seq.base, seq.coarse, seq.act);
    case GlobalTokenMode::act: return seq.act;
    case GlobalTokenMode::max: return nn::max_rows(seq.base);
    case GlobalTokenMode::mean: return nn::mean_rows(seq.base);
  }
  return seq.act;
}

Tensor classify(const Tensor& global, const CfgtParams& params) { return params.classifier(global); }

Tensor cross_entropy(const Tensor& logits, int label) {
  if (logits.rows() != 1) throw InvalidArgument("cross_entropy: logits must be a single row");
  const Eigen::Index c = logits.cols();
  if (c < 2) throw InvalidArgument("cross_entropy: at least two classes required");
  if (label < 1 || label > c) {
    throw InvalidArgument("cross_entropy: label " + std::to_string(label) + " outside [1, " +
                          std::to_string(c) + "]");
  }
  const Eigen::RowVectorXd l = logits.value().row(0);
  const double mx = l.maxCoeff();
  const double lse = mx + std::log((l.array() - mx).exp().sum());
  Matrix out(1, 1);
  out(0, 0) = lse - l(label - 1);
  Matrix grad = (l.array() - lse).exp().matrix();
  grad(0, label - 1) -= 1.0;
  return Tensor::from_op(std::move(out), {logits}, [grad](nn::Node& self) {
    self.parents[0]->grad_buffer() += self.grad(0, 0) * grad;
  });
}

Tensor project(const Tensor& global, const CfgtParams& params) {
  if (!global.value().allFinite()) throw InvalidInput("project: non-finite global vector");
  Tensor h = nn::gelu(params.proj_fc1(params.proj_norm(global)));
  return nn::l2_normalize_rows(params.proj_fc2(h));
}

}  // namespace pcad::cfgt
