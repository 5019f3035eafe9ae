#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pcad/common/rng.hpp"
#include "pcad/pc/cloud.hpp"

namespace pcad::data {

enum class ShapeFamily { sphere, torus, box, cylinder, cone, capsule };

std::string to_string(ShapeFamily f);
ShapeFamily shape_family_from_string(const std::string& s);
const std::vector<ShapeFamily>& all_shape_families();

/// Samples n points uniformly on the family's parametric surface, warps them
/// with a smooth low-frequency radial field of the given relative amplitude,
/// and scales about the origin so the farthest point sits at radius 0.5.
/// Everything is drawn from `seed`.
PointCloud generate_category(ShapeFamily family, int n_points, std::uint64_t seed,
                             double deform_amplitude = 0.05);

enum class DefectType { bulge, sink, missing };

std::string to_string(DefectType t);
DefectType defect_type_from_string(const std::string& s);

struct DefectResult {
  PointCloud cloud;
  std::vector<std::uint8_t> mask;
  Vec3 center = Vec3::Zero();
  int affected = 0;  // displaced or removed points
};

/// Picks a random surface point as defect center and edits the ball of
/// `radius` around it. Bulge/sink move points along the patch normal (oriented
/// away from the centroid) by magnitude * (1 - (d/radius)^2)^2 and mask them.
/// Missing removes the ball and masks surviving points within 1.5 * radius.
/// Magnitude 0 returns the cloud unchanged with an empty mask. Retries up to
/// 8 centers when the affected region comes out empty.
DefectResult inject_defect(const PointCloud& cloud, DefectType type, double magnitude, double radius,
                           Rng& rng);

}  // namespace pcad::data
