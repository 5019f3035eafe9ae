#include "pcad/scoring/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pcad/common/error.hpp"

namespace pcad::scoring {

std::vector<double> token_residuals(const Matrix& recon, const Matrix& target) {
  if (recon.rows() != target.rows() || recon.cols() != target.cols()) {
    throw InvalidArgument("token_residuals: shape mismatch");
  }
  std::vector<double> out(static_cast<std::size_t>(recon.rows()));
  for (Eigen::Index j = 0; j < recon.rows(); ++j) {
    out[static_cast<std::size_t>(j)] = (recon.row(j) - target.row(j)).norm();
  }
  return out;
}

std::vector<double> min_max_normalize(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return range_normalize(values, *lo, *hi);
}

std::vector<double> range_normalize(const std::vector<double>& values, double lo, double hi) {
  std::vector<double> out(values.size(), 0.0);
  if (!(hi > lo)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::clamp((values[i] - lo) / (hi - lo), 0.0, 1.0);
  }
  return out;
}

int effective_kernel_size(int kernel_size, int g) {
  if (kernel_size < 1 || kernel_size % 2 == 0) {
    throw InvalidArgument("Gaussian kernel size must be a positive odd integer");
  }
  if (g < 1) throw InvalidArgument("Gaussian smoothing needs at least one token");
  return std::min(kernel_size, 2 * g - 1);
}

std::vector<double> gaussian_smooth(const std::vector<double>& values, const SmoothingOptions& opt) {
  if (!(opt.sigma > 0.0)) throw InvalidArgument("Gaussian sigma must be positive");
  const int g = static_cast<int>(values.size());
  const int k = effective_kernel_size(opt.kernel_size, g);
  const int half = (k - 1) / 2;
  const double sigma = opt.sigma_mode == SigmaMode::absolute ? opt.sigma
                                                             : opt.sigma * std::max(half, 1);
  std::vector<double> w(static_cast<std::size_t>(half + 1));
  for (int t = 0; t <= half; ++t) w[static_cast<std::size_t>(t)] = std::exp(-0.5 * (t * t) / (sigma * sigma));

  std::vector<double> out(values.size());
  for (int i = 0; i < g; ++i) {
    double acc = 0.0, norm = 0.0;
    const int lo = std::max(0, i - half), hi = std::min(g - 1, i + half);
    for (int j = lo; j <= hi; ++j) {
      const double wj = w[static_cast<std::size_t>(std::abs(j - i))];
      acc += wj * values[static_cast<std::size_t>(j)];
      norm += wj;
    }
    // Rounding can push a convex combination a hair outside its inputs.
    out[static_cast<std::size_t>(i)] = std::clamp(acc / norm, 0.0, 1.0);
  }
  return out;
}

std::vector<double> score_tokens(const Matrix& recon, const Matrix& target, const SmoothingOptions& opt) {
  return gaussian_smooth(min_max_normalize(token_residuals(recon, target)), opt);
}

std::vector<int> nearest_center(const PointCloud& cloud, const GroupSet& groups) {
  std::vector<int> out(static_cast<std::size_t>(cloud.size()));
  for (int i = 0; i < cloud.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int m = 0; m < groups.size(); ++m) {
      const double d = squared_distance(cloud.points.data() + 3 * i, groups.centers.data() + 3 * m);
      if (d < best) {
        best = d;
        arg = m;
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
  }
  return out;
}

std::vector<double> propagate_to_points(const std::vector<double>& token_scores,
                                        const PointCloud& cloud, const GroupSet& groups) {
  if (static_cast<int>(token_scores.size()) != groups.size()) {
    throw InvalidArgument("propagate_to_points: expected one score per group");
  }
  const std::vector<int> owner = nearest_center(cloud, groups);
  std::vector<double> out(owner.size());
  for (std::size_t i = 0; i < owner.size(); ++i) out[i] = token_scores[static_cast<std::size_t>(owner[i])];
  return out;
}

AnomalyResult make_result(std::vector<double> token_scores, const PointCloud& cloud,
                          const GroupSet& groups) {
  AnomalyResult r;
  r.point_scores = propagate_to_points(token_scores, cloud, groups);
  r.object_score = token_scores.empty() ? 0.0 : *std::max_element(token_scores.begin(), token_scores.end());
  r.token_scores = std::move(token_scores);
  return r;
}

}  // namespace pcad::scoring
