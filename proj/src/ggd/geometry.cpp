#include "pcad/ggd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>

#include <Eigen/Geometry>

#include "pcad/common/error.hpp"
#include "pcad/ggd/eigen3x3.hpp"

namespace pcad::ggd {

Eigen::Matrix3d covariance(const Points& points, const std::vector<int>& indices) {
  if (indices.empty()) throw InvalidArgument("covariance: empty index set");
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int i : indices) mean += points.row(i).transpose();
  mean /= static_cast<double>(indices.size());
  Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
  for (int i : indices) {
    const Eigen::Vector3d d = points.row(i).transpose() - mean;
    c.noalias() += d * d.transpose();
  }
  return c / static_cast<double>(indices.size());
}

Vec3 canonical_sign(const Vec3& v) {
  for (int axis : {2, 0, 1}) {
    if (v(axis) > 0.0) return v;
    if (v(axis) < 0.0) return -v;
  }
  return v;
}

LocalFrame local_frame(const Points& points, const std::vector<int>& indices) {
  const SymmetricEigen3 eig = eigen_symmetric3(covariance(points, indices));
  LocalFrame f;
  f.eigenvalues = eig.values;
  f.eigenvectors = eig.vectors;
  const double l0 = std::max(eig.values(0), 0.0);
  const double trace = l0 + std::max(eig.values(1), 0.0) + std::max(eig.values(2), 0.0);
  if (trace > 0.0) {
    f.curvature = std::clamp(l0 / trace, 0.0, 1.0 / 3.0);
    f.normal = canonical_sign(eig.vectors.col(0));
  }
  return f;
}

std::vector<int> radius_neighborhood(const Points& points, const Vec3& query, double radius,
                                     bool* fallback) {
  const int n = static_cast<int>(points.rows());
  const double r2 = radius * radius;
  std::vector<int> out;
  std::vector<std::pair<double, int>> all;
  all.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double d = squared_distance(points.data() + 3 * i, query.data());
    all.emplace_back(d, i);
    if (d <= r2) out.push_back(i);
  }
  const bool short_ball = out.size() < 3;
  if (fallback) *fallback = short_ball;
  if (short_ball) {
    const int take = std::min(3, n);
    std::partial_sort(all.begin(), all.begin() + take, all.end());
    out.clear();
    for (int j = 0; j < take; ++j) out.push_back(all[j].second);
  }
  return out;
}

double unsigned_angle(const Vec3& a, const Vec3& b) {
  // atan2 stays well-conditioned for nearly parallel directions.
  return std::atan2(a.cross(b).norm(), std::abs(a.dot(b)));
}

std::vector<GeoDescriptor> compute_geo_descriptors(const PointCloud& cloud, const GroupSet& groups) {
  return compute_geo_descriptors(cloud, groups.center_indices, groups.adaptive_radius);
}

std::vector<GeoDescriptor> compute_geo_descriptors(const PointCloud& cloud, const std::vector<int>& centers,
                                                   double radius) {
  cloud.validate();
  if (!(radius >= 0.0) || !std::isfinite(radius)) throw InvalidArgument("descriptor radius must be finite and >= 0");
  const Points& pts = cloud.points;
  for (int c : centers) {
    if (c < 0 || c >= cloud.size()) throw InvalidArgument("descriptor center index out of range");
  }
  std::vector<std::optional<LocalFrame>> frames(static_cast<std::size_t>(cloud.size()));
  auto frame_at = [&](int i) -> const LocalFrame& {
    auto& slot = frames[static_cast<std::size_t>(i)];
    if (!slot) slot = local_frame(pts, radius_neighborhood(pts, cloud.point(i), radius));
    return *slot;
  };

  std::vector<GeoDescriptor> out(centers.size());
  for (std::size_t m = 0; m < centers.size(); ++m) {
    bool fallback = false;
    const Vec3 center = cloud.point(centers[m]);
    const std::vector<int> ball = radius_neighborhood(pts, center, radius, &fallback);
    const LocalFrame f = local_frame(pts, ball);
    GeoDescriptor& d = out[m];
    d.normal = f.normal;
    d.curvature = f.curvature;
    d.eigenvalues = f.eigenvalues;
    d.fallback = fallback;
    double sum_angle = 0.0, sum_curv = 0.0;
    for (int j : ball) {
      const LocalFrame& fj = frame_at(j);
      sum_angle += unsigned_angle(f.normal, fj.normal);
      sum_curv += std::abs(f.curvature - fj.curvature);
    }
    d.v_norm = sum_angle / static_cast<double>(ball.size());
    d.v_curv = sum_curv / static_cast<double>(ball.size());
  }
  return out;
}

}  // namespace pcad::ggd
