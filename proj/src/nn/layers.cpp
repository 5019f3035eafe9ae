#include "pcad/nn/layers.hpp"

#include <cmath>

#include "pcad/common/error.hpp"
#include "pcad/nn/ops.hpp"

namespace pcad::nn {

Tensor ParamStore::add(const std::string& name, Matrix init, bool decay) {
  if (entries_.count(name)) throw InvalidArgument("duplicate parameter name " + name);
  Tensor t = Tensor::parameter(std::move(init));
  entries_[name] = Entry{t, decay, true};
  return t;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw InvalidArgument("unknown parameter " + name);
  return it->second.tensor;
}

void ParamStore::set_trainable_prefix(const std::string& prefix, bool trainable) {
  for (auto& [name, e] : entries_) {
    if (name.rfind(prefix, 0) == 0) e.trainable = trainable;
  }
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, e] : entries_) n += static_cast<std::size_t>(e.tensor.value().size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [name, e] : entries_) e.tensor.zero_grad();
}

Matrix init_matrix(Eigen::Index rows, Eigen::Index cols, Init init, Rng& rng) {
  Matrix m(rows, cols);
  switch (init) {
    case Init::zeros:
      m.setZero();
      break;
    case Init::ones:
      m.setOnes();
      break;
    case Init::trunc_normal_002:
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.truncated_normal(0.02);
      break;
    case Init::he_normal: {
      const double std = std::sqrt(2.0 / static_cast<double>(rows));
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, std);
      break;
    }
  }
  return m;
}

Linear Linear::create(ParamStore& store, const std::string& name, Eigen::Index in,
                      Eigen::Index out, Init init, Rng& rng, bool with_bias) {
  Linear l;
  l.weight = store.add(name + ".weight", init_matrix(in, out, init, rng));
  if (with_bias) l.bias = store.add(name + ".bias", Matrix::Zero(1, out), false);
  return l;
}

Tensor Linear::operator()(const Tensor& x) const {
  Tensor y = matmul(x, weight);
  return bias.defined() ? add_row(y, bias) : y;
}

LayerNorm LayerNorm::create(ParamStore& store, const std::string& name, Eigen::Index width) {
  LayerNorm ln;
  ln.gamma = store.add(name + ".gamma", Matrix::Ones(1, width), false);
  ln.beta = store.add(name + ".beta", Matrix::Zero(1, width), false);
  return ln;
}

Tensor LayerNorm::operator()(const Tensor& x) const { return layer_norm(x, gamma, beta); }

Mlp2 Mlp2::create(ParamStore& store, const std::string& name, Eigen::Index in,
                  Eigen::Index hidden, Eigen::Index out, Init init, Rng& rng) {
  Mlp2 m;
  m.first = Linear::create(store, name + ".fc1", in, hidden, init, rng);
  m.second = Linear::create(store, name + ".fc2", hidden, out, init, rng);
  return m;
}

Tensor Mlp2::operator()(const Tensor& x) const { return second(relu(first(x))); }

}  // namespace pcad::nn
