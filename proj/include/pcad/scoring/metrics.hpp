#pragma once

#include <span>
#include <vector>

#include "pcad/nn/tensor.hpp"

namespace pcad::metrics {

/// Mann-Whitney statistic: fraction of (positive, negative) pairs ranked
/// correctly, ties counted as one half. Throws UndefinedMetric unless both
/// classes occur.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Average precision: sum over distinct descending thresholds of
/// (R_k - R_{k-1}) * P_k. Throws UndefinedMetric without positives.
double aupr(std::span<const double> scores, std::span<const int> labels);

/// Mean silhouette coefficient under Euclidean distance. Singleton clusters
/// contribute 0. Throws UndefinedMetric with fewer than two clusters.
double silhouette(const nn::Matrix& rows, std::span<const int> labels);

/// Average ranks (ties share the mean rank), 1-based.
std::vector<double> average_ranks(std::span<const double> values);

/// Spearman rank correlation (Pearson correlation of average ranks).
double spearman(std::span<const double> a, std::span<const double> b);

double mean(std::span<const double> v);
/// Population variance.
double variance(std::span<const double> v);

}  // namespace pcad::metrics
