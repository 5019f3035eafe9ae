#include "pcad/nn/attention.hpp"

#include <cmath>
#include <limits>

#include "pcad/common/error.hpp"

namespace pcad::nn {

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    // Eigen's vectorized exp clamps its input, so masked logits are zeroed explicitly.
    p.row(i) = (logits.row(i).array() == -std::numeric_limits<double>::infinity())
                   .select(0.0, (logits.row(i).array() - mx).exp());
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v, int heads,
                            const KeyGuidance& guidance, std::vector<Matrix>* weights_out) {
  const Eigen::Index nq = q.rows(), nk = k.rows(), d = q.cols();
  if (k.cols() != d || v.cols() != d) throw InvalidArgument("attention: width mismatch");
  if (v.rows() != nk) throw InvalidArgument("attention: key/value count mismatch");
  if (heads < 1 || d % heads != 0) throw InvalidArgument("attention: width not divisible by heads");
  const Guidance mode = guidance.mode;
  const bool guided = mode != Guidance::none;
  if (guided) {
    if (!guidance.values.defined() || guidance.values.rows() != 1 || guidance.values.cols() != nk) {
      throw InvalidArgument("attention: guidance must be 1 x keys");
    }
    if (!guidance.beta.defined() || guidance.beta.rows() != 1 || guidance.beta.cols() != 1) {
      throw InvalidArgument("attention: beta must be 1 x 1");
    }
  }
  const Eigen::Index dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix bvec = guided ? Matrix(guidance.values.value()) : Matrix::Zero(1, nk);
  const double beta = guided ? guidance.beta.item() : 0.0;

  // Additive logit term shared by every head and query row.
  Eigen::RowVectorXd logit_offset = Eigen::RowVectorXd::Zero(nk);
  if (mode == Guidance::bias) {
    logit_offset = beta * bvec.row(0);
  } else if (mode == Guidance::mask) {
    const double mean = bvec.mean();
    Eigen::Index keep = 0;
    bvec.row(0).maxCoeff(&keep);
    for (Eigen::Index j = 0; j < nk; ++j) {
      if (bvec(0, j) < mean && j != keep) logit_offset(j) = -std::numeric_limits<double>::infinity();
    }
  }
  Eigen::RowVectorXd gate = Eigen::RowVectorXd::Ones(nk);
  if (mode == Guidance::gate) {
    gate = (bvec.row(0).array() * beta).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  }

  const Matrix& qv = q.value();
  const Matrix& kv = k.value();
  Matrix vg = v.value();
  if (mode == Guidance::gate) vg = gate.asDiagonal() * vg;

  std::vector<Matrix> probs(heads);
  Matrix out(nq, d);
  for (int h = 0; h < heads; ++h) {
    Matrix logits = (qv.middleCols(h * dh, dh) * kv.middleCols(h * dh, dh).transpose()) * scale;
    logits.rowwise() += logit_offset;
    probs[h] = softmax_rows(logits);
    out.middleCols(h * dh, dh).noalias() = probs[h] * vg.middleCols(h * dh, dh);
  }
  if (weights_out) *weights_out = probs;

  std::vector<Tensor> parents{q, k, v};
  if (guided) {
    parents.push_back(guidance.values);
    parents.push_back(guidance.beta);
  }
  Matrix qc = qv, kc = kv, vc = v.value();
  return Tensor::from_op(
      std::move(out), parents,
      [=, probs = std::move(probs), vg = std::move(vg), bvec = std::move(bvec)](Node& self) {
        const bool need_q = self.parents[0]->requires_grad;
        const bool need_k = self.parents[1]->requires_grad;
        const bool need_v = self.parents[2]->requires_grad;
        const bool need_b = guided && self.parents[3]->requires_grad;
        const bool need_beta = guided && self.parents[4]->requires_grad;
        Matrix dq = Matrix::Zero(nq, d), dk = Matrix::Zero(nk, d), dvg = Matrix::Zero(nk, d);
        Eigen::RowVectorXd ds_colsum = Eigen::RowVectorXd::Zero(nk);
        for (int h = 0; h < heads; ++h) {
          const Matrix& p = probs[h];
          const auto dout = self.grad.middleCols(h * dh, dh);
          dvg.middleCols(h * dh, dh).noalias() += p.transpose() * dout;
          Matrix dp = dout * vg.middleCols(h * dh, dh).transpose();
          Eigen::VectorXd rowdot = (dp.cwiseProduct(p)).rowwise().sum();
          Matrix dlogits = p.cwiseProduct((dp.colwise() - rowdot));
          ds_colsum += dlogits.colwise().sum();
          if (need_q) dq.middleCols(h * dh, dh).noalias() += scale * dlogits * kc.middleCols(h * dh, dh);
          if (need_k) dk.middleCols(h * dh, dh).noalias() += scale * dlogits.transpose() * qc.middleCols(h * dh, dh);
        }
        if (need_q) self.parents[0]->accumulate(dq);
        if (need_k) self.parents[1]->accumulate(dk);
        if (mode == Guidance::gate) {
          if (need_v) self.parents[2]->accumulate(gate.asDiagonal() * dvg);
          // d gate_j = sum_c dvg_jc * v_jc; d(beta*B_j) = dgate_j * s(1-s).
          Eigen::RowVectorXd dgate = dvg.cwiseProduct(vc).rowwise().sum().transpose();
          Eigen::RowVectorXd dpre = dgate.array() * gate.array() * (1.0 - gate.array());
          if (need_b) self.parents[3]->grad_buffer().row(0) += beta * dpre;
          if (need_beta) self.parents[4]->grad_buffer()(0, 0) += dpre.dot(bvec.row(0));
        } else {
          if (need_v) self.parents[2]->accumulate(dvg);
          if (mode == Guidance::bias) {
            if (need_b) self.parents[3]->grad_buffer().row(0) += beta * ds_colsum;
            if (need_beta) self.parents[4]->grad_buffer()(0, 0) += ds_colsum.dot(bvec.row(0));
          }
        }
      });
}

}  // namespace pcad::nn
