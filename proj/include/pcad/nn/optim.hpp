#pragma once

#include <map>
#include <string>

#include "pcad/nn/layers.hpp"

namespace pcad::nn {

struct AdamWOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// Decoupled-weight-decay Adam over every trainable entry of a ParamStore.
/// Entries registered with decay=false (biases, norms, tokens) skip decay.
class AdamW {
 public:
  AdamW(ParamStore& store, AdamWOptions options);

  void set_lr(double lr) { options_.lr = lr; }
  double lr() const { return options_.lr; }
  long steps() const { return step_; }
  /// Applies one update from the accumulated gradients, scaled by grad_scale
  /// (1/n for n accumulated samples), then clears them.
  void step(double grad_scale = 1.0);

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };
  ParamStore& store_;
  AdamWOptions options_;
  std::map<std::string, Moments> moments_;
  long step_ = 0;
};

/// Cosine annealing from base_lr at epoch 0 to base_lr * floor_ratio at
/// epoch total_epochs.
double cosine_lr(double base_lr, int epoch, int total_epochs, double floor_ratio = 0.01);

}  // namespace pcad::nn
