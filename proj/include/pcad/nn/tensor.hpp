#pragma once

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

namespace pcad::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::Matrix<double, 1, Eigen::Dynamic>;

// Reverse-mode autodiff over dense fp64 matrices. A Tensor is a cheap handle
// to a graph node; ops build new nodes that keep their parents alive, and
// backward() walks the graph from a scalar root in reverse topological order.
struct Node {
  Matrix value;
  Matrix grad;  // allocated lazily, same shape as value
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void accumulate(const Matrix& g);
  Matrix& grad_buffer();
};

class Tensor {
 public:
  Tensor() = default;

  /// Leaf without gradient tracking.
  static Tensor constant(Matrix value);
  /// Trainable leaf; gradients accumulate across backward() calls until
  /// zero_grad().
  static Tensor parameter(Matrix value);
  /// Internal: an op result whose backward is given.
  static Tensor from_op(Matrix value, std::vector<Tensor> parents,
                        std::function<void(Node&)> backward_fn);

  bool defined() const { return node_ != nullptr; }
  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  /// Zero matrix when nothing has been accumulated yet.
  Matrix grad() const;
  void zero_grad();
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  double item() const;

  /// Same value, cut from the graph.
  Tensor detach() const { return constant(value()); }

  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& shared() const { return node_; }

 private:
  std::shared_ptr<Node> node_;
};

/// Back-propagates from a 1x1 tensor (seed gradient 1).
void backward(const Tensor& root);

}  // namespace pcad::nn
