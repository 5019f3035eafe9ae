#pragma once

#include <vector>

#include "pcad/pc/grouping.hpp"

namespace pcad::ggd {

/// Local surface statistics at one group center.
struct GeoDescriptor {
  Vec3 normal = Vec3::UnitZ();  // unit, sign-canonicalized
  double curvature = 0.0;       // lambda0 / (lambda0 + lambda1 + lambda2), in [0, 1/3]
  double v_norm = 0.0;          // mean unsigned normal angle to neighbors, radians
  double v_curv = 0.0;          // mean |curvature difference| to neighbors
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();  // ascending
  bool fallback = false;        // radius ball held < 3 points; 3 nearest used
};

/// PCA frame of a point set.
struct LocalFrame {
  Vec3 normal = Vec3::UnitZ();
  double curvature = 0.0;
  Eigen::Vector3d eigenvalues = Eigen::Vector3d::Zero();
  Eigen::Matrix3d eigenvectors = Eigen::Matrix3d::Identity();
};

/// Population covariance of the listed points about their mean.
Eigen::Matrix3d covariance(const Points& points, const std::vector<int>& indices);

/// Flips v so its z component is positive; ties fall to x, then y.
Vec3 canonical_sign(const Vec3& v);

/// Normal and curvature from the covariance spectrum. A zero-trace
/// covariance yields curvature 0 and normal +z.
LocalFrame local_frame(const Points& points, const std::vector<int>& indices);

/// Indices within `radius` of `query` (inclusive), in index order. When
/// fewer than 3 qualify, returns the 3 nearest instead and sets `fallback`.
std::vector<int> radius_neighborhood(const Points& points, const Vec3& query, double radius,
                                     bool* fallback = nullptr);

/// Unsigned angle between two directions, min(theta, pi - theta).
double unsigned_angle(const Vec3& a, const Vec3& b);

/// Per-center descriptors using radius balls of size groups.adaptive_radius.
std::vector<GeoDescriptor> compute_geo_descriptors(const PointCloud& cloud, const GroupSet& groups);
/// Same, for explicit center indices into the cloud and an explicit radius.
std::vector<GeoDescriptor> compute_geo_descriptors(const PointCloud& cloud, const std::vector<int>& centers,
                                                   double radius);

}  // namespace pcad::ggd
