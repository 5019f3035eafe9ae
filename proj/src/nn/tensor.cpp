#include "pcad/nn/tensor.hpp"

#include <unordered_set>

#include "pcad/common/error.hpp"

namespace pcad::nn {

Matrix& Node::grad_buffer() {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
    grad = Matrix::Zero(value.rows(), value.cols());
  }
  return grad;
}

void Node::accumulate(const Matrix& g) { grad_buffer() += g; }

Tensor Tensor::constant(Matrix value) {
  Tensor t;
  t.node_ = std::make_shared<Node>();
  t.node_->value = std::move(value);
  return t;
}

Tensor Tensor::parameter(Matrix value) {
  Tensor t = constant(std::move(value));
  t.node_->requires_grad = true;
  return t;
}

Tensor Tensor::from_op(Matrix value, std::vector<Tensor> parents,
                       std::function<void(Node&)> backward_fn) {
  Tensor t = constant(std::move(value));
  bool any = false;
  for (const Tensor& p : parents) any = any || p.requires_grad();
  if (any) {
    t.node_->requires_grad = true;
    t.node_->backward_fn = std::move(backward_fn);
    t.node_->parents.reserve(parents.size());
    for (Tensor& p : parents) t.node_->parents.push_back(p.node_);
  }
  return t;
}

Matrix Tensor::grad() const {
  if (node_->grad.size() == 0) return Matrix::Zero(rows(), cols());
  return node_->grad;
}

void Tensor::zero_grad() {
  if (node_->grad.size() != 0) node_->grad.setZero();
}

double Tensor::item() const {
  if (rows() != 1 || cols() != 1) throw InvalidArgument("item() on non-scalar tensor");
  return node_->value(0, 0);
}

void backward(const Tensor& root) {
  if (root.rows() != 1 || root.cols() != 1) {
    throw InvalidArgument("backward() requires a scalar root");
  }
  if (!root.requires_grad()) return;

  // Iterative post-order DFS for a topological order.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node(), 0);
  visited.insert(root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  root.node()->grad_buffer()(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && n->grad.size() != 0) n->backward_fn(*n);
  }
  // Interior gradients are not needed once propagated.
  for (Node* n : order) {
    if (n->backward_fn) n->grad.resize(0, 0);
  }
}

}  // namespace pcad::nn
