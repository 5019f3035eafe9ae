#include "pcad/encoder/local_encoder.hpp"

#include <cmath>
#include <string>

#include "pcad/common/error.hpp"
#include "pcad/nn/ops.hpp"

namespace pcad::encoder {
namespace {

// x W + b evaluated one row at a time, so a row's result never depends on
// which other rows share the batch (permutation and duplicate exactness).
Tensor rowwise_linear(const Tensor& x, const nn::Linear& layer) {
  const Matrix& xv = x.value();
  const Matrix& w = layer.weight.value();
  if (xv.cols() != w.rows()) throw InvalidArgument("encoder: linear input width mismatch");
  Matrix out(xv.rows(), w.cols());
  for (Eigen::Index i = 0; i < xv.rows(); ++i) {
    out.row(i).noalias() = xv.row(i) * w;
    out.row(i) += layer.bias.value().row(0);
  }
  Matrix xc = xv, wc = w;
  return Tensor::from_op(std::move(out), {x, layer.weight, layer.bias}, [xc, wc](nn::Node& self) {
    if (self.parents[0]->requires_grad) self.parents[0]->grad_buffer().noalias() += self.grad * wc.transpose();
    if (self.parents[1]->requires_grad) self.parents[1]->grad_buffer().noalias() += xc.transpose() * self.grad;
    if (self.parents[2]->requires_grad) self.parents[2]->grad_buffer() += self.grad.colwise().sum();
  });
}

// Max over consecutive blocks of `segment` rows: (g*segment) x h -> g x h.
Tensor segment_max(const Tensor& x, Eigen::Index segment) {
  const Matrix& xv = x.value();
  const Eigen::Index g = xv.rows() / segment, h = xv.cols();
  Matrix out(g, h);
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(g * h));
  for (Eigen::Index m = 0; m < g; ++m) {
    for (Eigen::Index c = 0; c < h; ++c) {
      Eigen::Index best = m * segment;
      for (Eigen::Index i = best + 1; i < (m + 1) * segment; ++i) {
        if (xv(i, c) > xv(best, c)) best = i;
      }
      out(m, c) = xv(best, c);
      arg[static_cast<std::size_t>(m * h + c)] = best;
    }
  }
  return Tensor::from_op(std::move(out), {x}, [arg, h](nn::Node& self) {
    Matrix& gx = self.parents[0]->grad_buffer();
    for (Eigen::Index m = 0; m < self.grad.rows(); ++m) {
      for (Eigen::Index c = 0; c < h; ++c) gx(arg[static_cast<std::size_t>(m * h + c)], c) += self.grad(m, c);
    }
  });
}

Tensor encode_batch(const Matrix& relative, Eigen::Index segment, const Matrix& centers,
                    const EncoderParams& p) {
  if (!relative.allFinite() || !centers.allFinite()) {
    throw InvalidInput("encoder: non-finite neighborhood coordinates");
  }
  Tensor x = Tensor::constant(relative);
  Tensor a1 = nn::relu(rowwise_linear(x, p.lift1));
  Tensor a2 = nn::relu(rowwise_linear(a1, p.lift2));
  Tensor pooled = segment_max(a2, segment);
  Tensor local = rowwise_linear(pooled, p.project);
  return nn::add(local, embed_positions(p.position, centers));
}

}  // namespace

EncoderParams EncoderParams::create(nn::ParamStore& store, const std::string& prefix, int hidden,
                                    int width, Rng& rng) {
  if (hidden < 1 || width < 1) throw InvalidArgument("encoder: widths must be positive");
  EncoderParams p;
  p.hidden = hidden;
  p.width = width;
  p.lift1 = nn::Linear::create(store, prefix + ".lift1", 3, hidden, nn::Init::he_normal, rng);
  p.lift2 = nn::Linear::create(store, prefix + ".lift2", hidden, hidden, nn::Init::he_normal, rng);
  p.project = nn::Linear::create(store, prefix + ".project", hidden, width, nn::Init::he_normal, rng);
  p.position = nn::Mlp2::create(store, prefix + ".position", 3, width, width, nn::Init::he_normal, rng);
  return p;
}

void EncoderParams::validate() const {
  auto check = [](const nn::Linear& l, Eigen::Index in, Eigen::Index out, const char* what) {
    if (l.weight.rows() != in || l.weight.cols() != out || l.bias.cols() != out) {
      throw InvalidInput(std::string("encoder: bad shape for ") + what);
    }
    if (!l.weight.value().allFinite() || !l.bias.value().allFinite()) {
      throw InvalidInput(std::string("encoder: non-finite weights in ") + what);
    }
  };
  check(lift1, 3, hidden, "lift1");
  check(lift2, hidden, hidden, "lift2");
  check(project, hidden, width, "project");
  check(position.first, 3, width, "position.fc1");
  check(position.second, width, width, "position.fc2");
}

Tensor embed_positions(const nn::Mlp2& position, const Matrix& centers) {
  Tensor c = Tensor::constant(centers);
  return rowwise_linear(nn::relu(rowwise_linear(c, position.first)), position.second);
}

Eigen::RowVectorXd encode_neighborhood(const Points& neighborhood, const Vec3& center,
                                       const EncoderParams& params, double coord_scale) {
  if (neighborhood.rows() < 1) throw InvalidArgument("encode_neighborhood: empty neighborhood");
  if (!(coord_scale > 0.0) || !std::isfinite(coord_scale)) {
    throw InvalidArgument("encode_neighborhood: coordinate scale must be positive");
  }
  Matrix rel = neighborhood;
  rel.rowwise() -= center.transpose();
  rel /= coord_scale;
  Matrix c = center.transpose();
  return encode_batch(rel, neighborhood.rows(), c, params).value().row(0);
}

Tensor encode_resolution(const PointCloud& cloud, const GroupSet& groups, int r,
                         const EncoderParams& params) {
  const IndexMatrix& rows = groups.at(r);
  const double scale = groups.adaptive_radius > 0.0 ? groups.adaptive_radius : 1.0;
  const Eigen::Index g = rows.rows();
  Matrix rel(g * r, 3);
  for (Eigen::Index m = 0; m < g; ++m) {
    for (int j = 0; j < r; ++j) {
      rel.row(m * r + j) = (cloud.points.row(rows(m, j)) - groups.centers.row(m)) / scale;
    }
  }
  return encode_batch(rel, r, groups.centers, params);
}

Matrix jitter_features(const Matrix& tokens, double scale, double prob, Rng& rng, bool training) {
  if (!(scale > 0.0)) throw InvalidArgument("jitter: scale must be positive");
  if (prob < 0.0 || prob > 1.0) throw InvalidArgument("jitter: probability must be in [0, 1]");
  if (!training || prob == 0.0) return tokens;
  if (prob < 1.0 && rng.uniform() >= prob) return tokens;
  Matrix out = tokens;
  const double inv = 1.0 / (scale * std::sqrt(static_cast<double>(tokens.cols())));
  for (Eigen::Index i = 0; i < tokens.rows(); ++i) {
    const double sigma = tokens.row(i).norm() * inv;
    if (sigma == 0.0) continue;
    for (Eigen::Index j = 0; j < tokens.cols(); ++j) out(i, j) += sigma * rng.normal();
  }
  return out;
}

}  // namespace pcad::encoder
