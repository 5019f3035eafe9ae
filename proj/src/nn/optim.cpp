#include "pcad/nn/optim.hpp"

#include <cmath>
#include <numbers>

namespace pcad::nn {

AdamW::AdamW(ParamStore& store, AdamWOptions options) : store_(store), options_(options) {}

void AdamW::step(double grad_scale) {
  ++step_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (auto& [name, entry] : store_.entries()) {
    Tensor& t = entry.tensor;
    if (!entry.trainable) {
      t.zero_grad();
      continue;
    }
    const Matrix g = t.grad() * grad_scale;
    auto& mo = moments_[name];
    if (mo.m.size() == 0) {
      mo.m = Matrix::Zero(t.rows(), t.cols());
      mo.v = Matrix::Zero(t.rows(), t.cols());
    }
    mo.m = b1 * mo.m + (1.0 - b1) * g;
    mo.v = b2 * mo.v + (1.0 - b2) * g.cwiseProduct(g);
    Matrix& w = t.mutable_value();
    if (entry.decay && options_.weight_decay > 0.0) w *= 1.0 - options_.lr * options_.weight_decay;
    w.array() -= options_.lr * (mo.m.array() / c1) / ((mo.v.array() / c2).sqrt() + options_.eps);
    t.zero_grad();
  }
}

double cosine_lr(double base_lr, int epoch, int total_epochs, double floor_ratio) {
  if (total_epochs <= 0) return base_lr;
  const double min_lr = base_lr * floor_ratio;
  const double t = static_cast<double>(epoch) / static_cast<double>(total_epochs);
  return min_lr + 0.5 * (base_lr - min_lr) * (1.0 + std::cos(std::numbers::pi * t));
}

}  // namespace pcad::nn
