#pragma once

#include <map>
#include <string>
#include <vector>

#include "pcad/common/rng.hpp"
#include "pcad/nn/tensor.hpp"

namespace pcad::nn {

/// Named registry of trainable tensors. Names are hierarchical
/// ("cfgt.enc.0.attn.wq") and fix the checkpoint layout.
class ParamStore {
 public:
  struct Entry {
    Tensor tensor;
    bool decay = true;
    bool trainable = true;
  };

  Tensor add(const std::string& name, Matrix init, bool decay = true);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  /// Excluded from optimizer updates (values still checkpointed).
  void set_trainable_prefix(const std::string& prefix, bool trainable);

  const std::map<std::string, Entry>& entries() const { return entries_; }
  std::map<std::string, Entry>& entries() { return entries_; }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::map<std::string, Entry> entries_;
};

enum class Init { trunc_normal_002, he_normal, zeros, ones };

Matrix init_matrix(Eigen::Index rows, Eigen::Index cols, Init init, Rng& rng);

/// y = x W + b with W stored as in x out.
struct Linear {
  Tensor weight;
  Tensor bias;

  static Linear create(ParamStore& store, const std::string& name, Eigen::Index in,
                       Eigen::Index out, Init init, Rng& rng, bool with_bias = true);
  Tensor operator()(const Tensor& x) const;
};

struct LayerNorm {
  Tensor gamma;
  Tensor beta;

  static LayerNorm create(ParamStore& store, const std::string& name, Eigen::Index width);
  Tensor operator()(const Tensor& x) const;
};

/// Two linear layers with ReLU between them.
struct Mlp2 {
  Linear first;
  Linear second;

  static Mlp2 create(ParamStore& store, const std::string& name, Eigen::Index in,
                     Eigen::Index hidden, Eigen::Index out, Init init, Rng& rng);
  Tensor operator()(const Tensor& x) const;
};

}  // namespace pcad::nn
