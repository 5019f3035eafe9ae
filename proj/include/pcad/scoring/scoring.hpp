#pragma once

#include <vector>

#include "pcad/nn/tensor.hpp"
#include "pcad/pc/grouping.hpp"

namespace pcad::scoring {

using nn::Matrix;

/// How sigma is read: in token-index units, or as a fraction of the kernel
/// half-width ((kernel - 1) / 2).
enum class SigmaMode { absolute, kernel_relative };

struct SmoothingOptions {
  int kernel_size = 511;
  double sigma = 0.2;
  SigmaMode sigma_mode = SigmaMode::absolute;
};

/// Per-token l2 residual ||recon_j - target_j||.
std::vector<double> token_residuals(const Matrix& recon, const Matrix& target);

/// Min-max over the instance; a constant vector maps to all zeros.
std::vector<double> min_max_normalize(const std::vector<double>& values);

/// (v - lo) / (hi - lo) clipped to [0, 1]; hi <= lo maps to all zeros.
std::vector<double> range_normalize(const std::vector<double>& values, double lo, double hi);

/// Kernel length actually used for g tokens: min(k_g, 2g - 1). k_g must be odd.
int effective_kernel_size(int kernel_size, int g);

/// Discrete Gaussian along the token order. Near the ends the kernel is
/// truncated to valid positions and renormalized, so the output is a convex
/// combination of inputs.
std::vector<double> gaussian_smooth(const std::vector<double>& values, const SmoothingOptions& opt);

/// Residual -> instance min-max -> Gaussian smoothing.
std::vector<double> score_tokens(const Matrix& recon, const Matrix& target, const SmoothingOptions& opt);

struct AnomalyResult {
  std::vector<double> token_scores;
  std::vector<double> point_scores;
  double object_score = 0.0;
};

/// Each point takes the score of its nearest FPS center (ties: lowest center).
std::vector<double> propagate_to_points(const std::vector<double>& token_scores,
                                        const PointCloud& cloud, const GroupSet& groups);

/// Index of the nearest center for every point.
std::vector<int> nearest_center(const PointCloud& cloud, const GroupSet& groups);

/// Fills point scores and object score (max token score) from token scores.
AnomalyResult make_result(std::vector<double> token_scores, const PointCloud& cloud,
                          const GroupSet& groups);

}  // namespace pcad::scoring
