#include "pcad/nn/ops.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pcad/common/error.hpp"

namespace pcad::nn {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
}

inline bool wants(const Node& self, std::size_t i) { return self.parents[i]->requires_grad; }

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimension mismatch");
  Matrix av = a.value(), bv = b.value();
  Matrix out = av * bv;
  return Tensor::from_op(std::move(out), {a, b}, [av, bv](Node& self) {
    if (wants(self, 0)) self.parents[0]->grad_buffer().noalias() += self.grad * bv.transpose();
    if (wants(self, 1)) self.parents[1]->grad_buffer().noalias() += av.transpose() * self.grad;
  });
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  return Tensor::from_op(a.value() + b.value(), {a, b}, [](Node& self) {
    if (wants(self, 0)) self.parents[0]->accumulate(self.grad);
    if (wants(self, 1)) self.parents[1]->accumulate(self.grad);
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "sub");
  return Tensor::from_op(a.value() - b.value(), {a, b}, [](Node& self) {
    if (wants(self, 0)) self.parents[0]->accumulate(self.grad);
    if (wants(self, 1)) self.parents[1]->grad_buffer() -= self.grad;
  });
}

Tensor add_row(const Tensor& a, const Tensor& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw InvalidArgument("add_row: bad row shape");
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return Tensor::from_op(std::move(out), {a, row}, [](Node& self) {
    if (wants(self, 0)) self.parents[0]->accumulate(self.grad);
    if (wants(self, 1)) self.parents[1]->grad_buffer() += self.grad.colwise().sum();
  });
}

Tensor scale(const Tensor& a, double s) {
  return Tensor::from_op(a.value() * s, {a}, [s](Node& self) {
    self.parents[0]->grad_buffer() += s * self.grad;
  });
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Matrix av = a.value(), bv = b.value();
  Matrix out = av.cwiseProduct(bv);
  return Tensor::from_op(std::move(out), {a, b}, [av, bv](Node& self) {
    if (wants(self, 0)) self.parents[0]->grad_buffer() += self.grad.cwiseProduct(bv);
    if (wants(self, 1)) self.parents[1]->grad_buffer() += self.grad.cwiseProduct(av);
  });
}

Tensor relu(const Tensor& a) {
  Matrix out = a.value().cwiseMax(0.0);
  Matrix av = a.value();
  return Tensor::from_op(std::move(out), {a}, [av](Node& self) {
    self.parents[0]->grad_buffer() += (av.array() > 0.0).select(self.grad, 0.0);
  });
}

Tensor gelu(const Tensor& a) {
  const Matrix& x = a.value();
  Matrix cdf = x.unaryExpr([](double v) { return 0.5 * (1.0 + std::erf(v * std::numbers::sqrt2 / 2.0)); });
  Matrix out = x.cwiseProduct(cdf);
  Matrix xv = x;
  return Tensor::from_op(std::move(out), {a}, [xv, cdf](Node& self) {
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    Matrix pdf = xv.unaryExpr([&](double v) { return inv_sqrt_2pi * std::exp(-0.5 * v * v); });
    Matrix d = cdf + xv.cwiseProduct(pdf);
    self.parents[0]->grad_buffer() += self.grad.cwiseProduct(d);
  });
}

Tensor sigmoid(const Tensor& a) {
  Matrix out = a.value().unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  Matrix s = out;
  return Tensor::from_op(std::move(out), {a}, [s](Node& self) {
    self.parents[0]->grad_buffer() +=
        self.grad.cwiseProduct(s.cwiseProduct((1.0 - s.array()).matrix()));
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  const Eigen::Index n = x.rows(), c = x.cols();
  if (gamma.rows() != 1 || gamma.cols() != c || beta.rows() != 1 || beta.cols() != c) {
    throw InvalidArgument("layer_norm: gamma/beta must be 1 x cols");
  }
  Matrix xhat(n, c);
  Eigen::VectorXd inv_std(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = x.value().row(i).mean();
    const double var = (x.value().row(i).array() - mu).square().mean();
    inv_std(i) = 1.0 / std::sqrt(var + eps);
    xhat.row(i) = (x.value().row(i).array() - mu) * inv_std(i);
  }
  Matrix out = xhat;
  out.array().rowwise() *= gamma.value().row(0).array();
  out.rowwise() += beta.value().row(0);
  Matrix g = gamma.value();
  return Tensor::from_op(std::move(out), {x, gamma, beta}, [xhat, inv_std, g](Node& self) {
    const Matrix& dy = self.grad;
    if (wants(self, 1)) self.parents[1]->grad_buffer() += dy.cwiseProduct(xhat).colwise().sum();
    if (wants(self, 2)) self.parents[2]->grad_buffer() += dy.colwise().sum();
    if (wants(self, 0)) {
      Matrix dxhat = dy;
      dxhat.array().rowwise() *= g.row(0).array();
      const double c = static_cast<double>(dxhat.cols());
      Matrix& dx = self.parents[0]->grad_buffer();
      for (Eigen::Index i = 0; i < dxhat.rows(); ++i) {
        const double mean_d = dxhat.row(i).sum() / c;
        const double mean_dx = dxhat.row(i).dot(xhat.row(i)) / c;
        dx.row(i).array() +=
            inv_std(i) * (dxhat.row(i).array() - mean_d - xhat.row(i).array() * mean_dx);
      }
    }
  });
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw InvalidArgument("concat_cols: no inputs");
  const Eigen::Index n = parts[0].rows();
  Eigen::Index total = 0;
  for (const Tensor& p : parts) {
    if (p.rows() != n) throw InvalidArgument("concat_cols: row count mismatch");
    total += p.cols();
  }
  Matrix out(n, total);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Tensor& p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    offsets.push_back(off);
    off += p.cols();
  }
  return Tensor::from_op(std::move(out), parts, [offsets](Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      if (!wants(self, i)) continue;
      Node& p = *self.parents[i];
      p.grad_buffer() += self.grad.middleCols(offsets[i], p.value.cols());
    }
  });
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw InvalidArgument("concat_rows: no inputs");
  const Eigen::Index c = parts[0].cols();
  Eigen::Index total = 0;
  for (const Tensor& p : parts) {
    if (p.cols() != c) throw InvalidArgument("concat_rows: column count mismatch");
    total += p.rows();
  }
  Matrix out(total, c);
  std::vector<Eigen::Index> offsets;
  Eigen::Index off = 0;
  for (const Tensor& p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    offsets.push_back(off);
    off += p.rows();
  }
  return Tensor::from_op(std::move(out), parts, [offsets](Node& self) {
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      if (!wants(self, i)) continue;
      Node& p = *self.parents[i];
      p.grad_buffer() += self.grad.middleRows(offsets[i], p.value.rows());
    }
  });
}

Tensor slice_rows(const Tensor& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw InvalidArgument("slice_rows: range out of bounds");
  }
  return Tensor::from_op(a.value().middleRows(start, count), {a}, [start, count](Node& self) {
    self.parents[0]->grad_buffer().middleRows(start, count) += self.grad;
  });
}

Tensor broadcast_rows(const Tensor& row, Eigen::Index n) {
  if (row.rows() != 1) throw InvalidArgument("broadcast_rows: input must be a single row");
  Matrix out = row.value().replicate(n, 1);
  return Tensor::from_op(std::move(out), {row}, [](Node& self) {
    self.parents[0]->grad_buffer() += self.grad.colwise().sum();
  });
}

Tensor transpose(const Tensor& a) {
  return Tensor::from_op(a.value().transpose(), {a}, [](Node& self) {
    self.parents[0]->grad_buffer() += self.grad.transpose();
  });
}

Tensor mean_rows(const Tensor& a) {
  const double n = static_cast<double>(a.rows());
  if (a.rows() == 0) throw InvalidArgument("mean_rows: empty input");
  return Tensor::from_op(a.value().colwise().mean(), {a}, [n](Node& self) {
    self.parents[0]->grad_buffer().rowwise() += self.grad.row(0) / n;
  });
}

Tensor max_rows(const Tensor& a) {
  if (a.rows() == 0) throw InvalidArgument("max_rows: empty input");
  const Eigen::Index c = a.cols();
  Matrix out(1, c);
  std::vector<Eigen::Index> arg(c);
  for (Eigen::Index j = 0; j < c; ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < a.rows(); ++i) {
      if (a.value()(i, j) > a.value()(best, j)) best = i;
    }
    arg[j] = best;
    out(0, j) = a.value()(best, j);
  }
  return Tensor::from_op(std::move(out), {a}, [arg](Node& self) {
    Matrix& g = self.parents[0]->grad_buffer();
    for (std::size_t j = 0; j < arg.size(); ++j) g(arg[j], j) += self.grad(0, j);
  });
}

Tensor sum(const Tensor& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return Tensor::from_op(std::move(out), {a}, [](Node& self) {
    self.parents[0]->grad_buffer().array() += self.grad(0, 0);
  });
}

Tensor l2_normalize_rows(const Tensor& a) {
  Eigen::VectorXd norms = a.value().rowwise().norm();
  for (Eigen::Index i = 0; i < norms.size(); ++i) {
    if (!(norms(i) > 0.0)) throw DegenerateNorm("l2_normalize_rows: zero-norm row");
  }
  Matrix out = norms.cwiseInverse().asDiagonal() * a.value();
  Matrix y = out;
  return Tensor::from_op(std::move(out), {a}, [y, norms](Node& self) {
    Matrix& g = self.parents[0]->grad_buffer();
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      const double proj = self.grad.row(i).dot(y.row(i));
      g.row(i) += (self.grad.row(i) - proj * y.row(i)) / norms(i);
    }
  });
}

Tensor mean_squared_row_error(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mean_squared_row_error");
  Matrix diff = pred.value() - target.value();
  const double n = static_cast<double>(pred.rows());
  Matrix out(1, 1);
  out(0, 0) = diff.squaredNorm() / n;
  return Tensor::from_op(std::move(out), {pred, target}, [diff, n](Node& self) {
    const double s = 2.0 * self.grad(0, 0) / n;
    if (wants(self, 0)) self.parents[0]->grad_buffer() += s * diff;
    if (wants(self, 1)) self.parents[1]->grad_buffer() -= s * diff;
  });
}

}  // namespace pcad::nn
