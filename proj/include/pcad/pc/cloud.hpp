#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace pcad {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Vec3 = Eigen::Vector3d;

/// A raw N x 3 point cloud with optional per-point anomaly mask, object label
/// (0 normal, 1 anomalous) and category id (1-based).
struct PointCloud {
  Points points;
  std::optional<std::vector<std::uint8_t>> mask;
  std::optional<int> object_label;
  std::optional<int> category;

  PointCloud() = default;
  explicit PointCloud(Points pts) : points(std::move(pts)) {}

  int size() const { return static_cast<int>(points.rows()); }
  Vec3 point(int i) const { return points.row(i).transpose(); }

  /// Throws InvalidInput when N < 1, a coordinate is non-finite, the mask
  /// length differs from N, or the object label is outside {0, 1}.
  void validate() const;
};

/// Returns a copy translated to its centroid and scaled so the farthest point
/// lies on the unit sphere. Identity for a single point.
PointCloud normalize_unit_sphere(const PointCloud& cloud);

/// Squared Euclidean distance, written out so every caller (reference
/// routines, brute-force oracles, kernels) rounds identically.
inline double squared_distance(const double* a, const double* b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace pcad
