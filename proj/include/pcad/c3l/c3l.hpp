#pragma once

#include <deque>
#include <optional>

#include "pcad/nn/tensor.hpp"

namespace pcad::c3l {

using nn::Tensor;

/// FIFO store of detached unit-norm embeddings and their category labels.
/// Transient optimization state: never checkpointed.
class ContrastBuffer {
 public:
  struct Entry {
    Eigen::RowVectorXd z;
    int category = 0;
  };

  static constexpr int kDefaultCapacity = 64;

  explicit ContrastBuffer(int capacity = kDefaultCapacity);

  /// Appends a snapshot of z, evicting the oldest entry beyond capacity.
  /// Throws InvalidArgument unless ||z|| = 1 within 1e-6.
  void push(const Eigen::RowVectorXd& z, int category);
  void push(const Tensor& z, int category) { push(Eigen::RowVectorXd(z.value().row(0)), category); }

  int size() const { return static_cast<int>(entries_.size()); }
  int capacity() const { return capacity_; }
  bool empty() const { return entries_.empty(); }
  const Entry& at(int i) const { return entries_.at(static_cast<std::size_t>(i)); }
  const std::deque<Entry>& entries() const { return entries_; }
  void clear() { entries_.clear(); }

 private:
  int capacity_;
  std::deque<Entry> entries_;
};

/// Supervised contrastive loss of z (1 x d_z) against the buffer. Positives
/// share `category`, the anchor set is every buffer entry. Returns nullopt
/// (the skip sentinel) when the buffer holds no positive. Buffer entries are
/// constants, so no gradient reaches them.
std::optional<Tensor> scl_loss(const Tensor& z, int category, const ContrastBuffer& buffer, double tau);

struct LossWeights {
  double scl = 0.001;
  double cls = 0.001;
  double cos = 0.01;
};

/// Weighted sum of the enabled terms; an absent (skipped or disabled) term
/// contributes 0. Throws InvalidArgument on a negative weight.
Tensor c3l_total(const std::optional<Tensor>& scl, const std::optional<Tensor>& cls,
                 const std::optional<Tensor>& cos, const LossWeights& weights);
double c3l_total(std::optional<double> scl, std::optional<double> cls, std::optional<double> cos,
                 const LossWeights& weights);

}  // namespace pcad::c3l
