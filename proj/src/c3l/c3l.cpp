#include "pcad/c3l/c3l.hpp"

#include <cmath>
#include <string>

#include "pcad/common/error.hpp"
#include "pcad/nn/ops.hpp"

namespace pcad::c3l {

ContrastBuffer::ContrastBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw InvalidArgument("contrast buffer capacity must be positive");
}

void ContrastBuffer::push(const Eigen::RowVectorXd& z, int category) {
  const double n = z.norm();
  if (!(std::abs(n - 1.0) <= 1e-6)) {
    throw InvalidArgument("contrast buffer accepts unit vectors only (norm " + std::to_string(n) + ")");
  }
  if (!entries_.empty() && entries_.front().z.size() != z.size()) {
    throw InvalidArgument("contrast buffer embedding width mismatch");
  }
  entries_.push_back(Entry{z, category});
  while (static_cast<int>(entries_.size()) > capacity_) entries_.pop_front();
}

std::optional<Tensor> scl_loss(const Tensor& z, int category, const ContrastBuffer& buffer, double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("scl_loss: temperature must be positive");
  if (z.rows() != 1) throw InvalidArgument("scl_loss: z must be a single row");
  if (buffer.empty()) return std::nullopt;

  const int n = buffer.size();
  nn::Matrix anchors(n, z.cols());
  std::vector<int> positives;
  for (int a = 0; a < n; ++a) {
    const auto& e = buffer.at(a);
    if (e.z.size() != z.cols()) throw InvalidArgument("scl_loss: embedding width mismatch");
    anchors.row(a) = e.z;
    if (e.category == category) positives.push_back(a);
  }
  if (positives.empty()) return std::nullopt;

  const Eigen::VectorXd sims = anchors * z.value().row(0).transpose() / tau;
  const double mx = sims.maxCoeff();
  const double lse = mx + std::log((sims.array() - mx).exp().sum());
  double pos_mean = 0.0;
  for (int p : positives) pos_mean += sims(p);
  pos_mean /= static_cast<double>(positives.size());

  nn::Matrix out(1, 1);
  out(0, 0) = lse - pos_mean;

  // d/dz = (sum_a softmax_a z_a - mean_p z_p) / tau
  const Eigen::VectorXd weights = (sims.array() - lse).exp();
  Eigen::RowVectorXd grad = weights.transpose() * anchors;
  Eigen::RowVectorXd pos_sum = Eigen::RowVectorXd::Zero(z.cols());
  for (int p : positives) pos_sum += anchors.row(p);
  grad -= pos_sum / static_cast<double>(positives.size());
  grad /= tau;
  return Tensor::from_op(std::move(out), {z}, [grad](nn::Node& self) {
    self.parents[0]->grad_buffer().row(0) += self.grad(0, 0) * grad;
  });
}

namespace {
void check_weights(const LossWeights& w) {
  if (w.scl < 0.0 || w.cls < 0.0 || w.cos < 0.0) throw InvalidArgument("c3l weights must be non-negative");
}
}  // namespace

Tensor c3l_total(const std::optional<Tensor>& scl, const std::optional<Tensor>& cls,
                 const std::optional<Tensor>& cos, const LossWeights& weights) {
  check_weights(weights);
  Tensor total = Tensor::constant(nn::Matrix::Zero(1, 1));
  if (scl) total = nn::add(total, nn::scale(*scl, weights.scl));
  if (cls) total = nn::add(total, nn::scale(*cls, weights.cls));
  if (cos) total = nn::add(total, nn::scale(*cos, weights.cos));
  return total;
}

double c3l_total(std::optional<double> scl, std::optional<double> cls, std::optional<double> cos,
                 const LossWeights& weights) {
  check_weights(weights);
  return weights.scl * scl.value_or(0.0) + weights.cls * cls.value_or(0.0) +
         weights.cos * cos.value_or(0.0);
}

}  // namespace pcad::c3l
