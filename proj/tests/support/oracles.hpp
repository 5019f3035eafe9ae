#pragma once

// Independent reference implementations used only by tests. They favor
// obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "pcad/c3l/c3l.hpp"
#include "pcad/common/rng.hpp"
#include "pcad/nn/layers.hpp"
#include "pcad/nn/tensor.hpp"
#include "pcad/pc/cloud.hpp"

namespace pcad::testing {

inline Points random_points(int n, Rng& rng, double scale = 1.0) {
  Points p(n, 3);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) p(i, c) = rng.uniform(-scale, scale);
  }
  return p;
}

/// Random cloud where some points are exact copies of earlier ones and some
/// coordinates sit on a coarse lattice, so distance ties actually occur.
inline Points tie_heavy_points(int n, Rng& rng) {
  Points p(n, 3);
  for (int i = 0; i < n; ++i) {
    if (i > 0 && rng.uniform() < 0.15) {
      p.row(i) = p.row(static_cast<int>(rng.index(static_cast<std::uint64_t>(i))));
      continue;
    }
    for (int c = 0; c < 3; ++c) p(i, c) = static_cast<double>(static_cast<int>(rng.index(5))) - 2.0;
  }
  return p;
}

inline double sq(const Points& p, int a, int b) { return (p.row(a) - p.row(b)).squaredNorm(); }

/// Greedy maximin by exhaustive recomputation: at every step, the unselected
/// point whose minimum squared distance to the selected set is largest,
/// lowest index on ties.
inline std::vector<int> brute_fps(const Points& p, int g, int start) {
  const int n = static_cast<int>(p.rows());
  std::vector<int> sel{start};
  std::vector<bool> used(n, false);
  used[start] = true;
  while (static_cast<int>(sel.size()) < g) {
    int best = -1;
    double best_d = -1.0;
    for (int i = 0; i < n; ++i) {
      if (used[i]) continue;
      double dmin = std::numeric_limits<double>::infinity();
      for (int s : sel) dmin = std::min(dmin, squared_distance(p.data() + 3 * i, p.data() + 3 * s));
      if (dmin > best_d) {
        best_d = dmin;
        best = i;
      }
    }
    sel.push_back(best);
    used[best] = true;
  }
  return sel;
}

/// Full stable sort of all points by distance; equal distances keep index order.
inline std::vector<int> brute_knn_row(const Points& p, int center, int r) {
  const int n = static_cast<int>(p.rows());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return squared_distance(p.data() + 3 * a, p.data() + 3 * center) <
           squared_distance(p.data() + 3 * b, p.data() + 3 * center);
  });
  idx.resize(r);
  return idx;
}

/// Uniformly random rotation (via a normalized random quaternion) and a
/// translation, applied to every row.
inline Points rigid_motion(const Points& p, Rng& rng, Eigen::Matrix3d* rot_out = nullptr) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  const Eigen::Matrix3d R = q.toRotationMatrix();
  const Eigen::RowVector3d t(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
  if (rot_out) *rot_out = R;
  Points out = (p * R.transpose()).rowwise() + t;
  return out;
}

/// Pairwise Mann-Whitney count.
inline double pairwise_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double good = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) good += 1.0;
      if (s[i] == s[j]) good += 0.5;
    }
  }
  return good / pairs;
}

/// Exhaustive threshold sweep: for every distinct score t (descending),
/// precision and recall of the rule "score >= t", accumulated step-wise.
inline double sweep_aupr(const std::vector<double>& s, const std::vector<int>& y) {
  std::vector<double> thr(s.begin(), s.end());
  std::sort(thr.begin(), thr.end(), std::greater<>());
  thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
  const double pos = static_cast<double>(std::count(y.begin(), y.end(), 1));
  double prev_recall = 0.0, area = 0.0;
  for (double t : thr) {
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) (y[i] ? tp : fp) += 1.0;
    }
    const double recall = tp / pos;
    area += (recall - prev_recall) * tp / (tp + fp);
    prev_recall = recall;
  }
  return area;
}

// -1/|P| sum_p log( exp(z.z_p / tau) / sum_a exp(z.z_a / tau) ), written
// without any log-sum-exp rearrangement.
inline double brute_scl(const Eigen::RowVectorXd& z, int category, const c3l::ContrastBuffer& buf, double tau) {
  double denom = 0.0;
  for (const auto& e : buf.entries()) denom += std::exp(z.dot(e.z) / tau);
  double total = 0.0;
  int positives = 0;
  for (const auto& e : buf.entries()) {
    if (e.category != category) continue;
    total += std::log(std::exp(z.dot(e.z) / tau) / denom);
    ++positives;
  }
  return -total / positives;
}

struct GradCheck {
  double worst = 0.0;  // largest per-tensor relative error
  bool ok(double tol = 1e-4) const {
    if (worst > tol) std::fprintf(stderr, "gradcheck worst %g\n", worst);
    return worst <= tol;
  }
};

/// Compares backward() gradients of `loss` with central differences
/// (step h) for every leaf in `inputs`. Relative error per tensor is
/// ||analytic - numeric|| / max(||analytic||, ||numeric||, 1e-6 * max(1, |loss|)).
/// The floor absorbs cancellation noise when a gradient is identically zero.
inline GradCheck check_gradients(const std::function<nn::Tensor()>& loss, std::vector<nn::Tensor> inputs,
                                  double h = 1e-5) {
  for (nn::Tensor& t : inputs) t.zero_grad();
  const nn::Tensor root = loss();
  nn::backward(root);
  const double floor = 1e-6 * std::max(1.0, std::abs(root.item()));
  GradCheck result;
  for (nn::Tensor& t : inputs) {
    const nn::Matrix analytic = t.grad();
    nn::Matrix numeric(t.rows(), t.cols());
    for (Eigen::Index i = 0; i < t.value().size(); ++i) {
      double& x = t.mutable_value().data()[i];
      const double saved = x;
      x = saved + h;
      const double up = loss().item();
      x = saved - h;
      const double down = loss().item();
      x = saved;
      numeric.data()[i] = (up - down) / (2.0 * h);
    }
    const double denom = std::max({analytic.norm(), numeric.norm(), floor});
    result.worst = std::max(result.worst, (analytic - numeric).norm() / denom);
  }
  return result;
}

/// Replaces every parameter with N(0, scale^2) draws so that gradient checks
/// are not dominated by the small-scale initialization.
inline void randomize(nn::ParamStore& store, Rng& rng, double scale) {
  for (auto& [name, e] : store.entries()) {
    nn::Matrix& m = e.tensor.mutable_value();
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, scale);
  }
}

inline nn::Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng, double scale = 1.0) {
  nn::Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0.0, scale);
  return m;
}

}  // namespace pcad::testing
