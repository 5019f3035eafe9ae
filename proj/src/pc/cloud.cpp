#include "pcad/pc/cloud.hpp"

#include <cmath>
#include <string>

#include "pcad/common/error.hpp"

namespace pcad {

void PointCloud::validate() const {
  if (points.rows() < 1) throw InvalidInput("point cloud is empty");
  if (!points.allFinite()) throw InvalidInput("point cloud has non-finite coordinates");
  if (mask && static_cast<Eigen::Index>(mask->size()) != points.rows()) {
    throw InvalidInput("mask length " + std::to_string(mask->size()) +
                       " does not match point count " + std::to_string(points.rows()));
  }
  if (object_label && *object_label != 0 && *object_label != 1) {
    throw InvalidInput("object label must be 0 or 1");
  }
}

PointCloud normalize_unit_sphere(const PointCloud& cloud) {
  cloud.validate();
  PointCloud out = cloud;
  const Eigen::RowVector3d centroid = cloud.points.colwise().mean();
  out.points.rowwise() -= centroid;
  const double max_norm = out.points.rowwise().norm().maxCoeff();
  if (max_norm > 0.0) out.points /= max_norm;
  return out;
}

}  // namespace pcad
