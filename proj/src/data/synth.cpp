#include "pcad/data/synth.hpp"

#include <cmath>
#include <numbers>

#include "pcad/common/error.hpp"
#include "pcad/ggd/geometry.hpp"

namespace pcad::data {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 random_direction(Rng& rng) {
  for (;;) {
    Vec3 v(rng.normal(), rng.normal(), rng.normal());
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

Vec3 sample_sphere(Rng& rng) { return random_direction(rng); }

// Major radius 1, minor radius 0.4. Rejection on the area element keeps the
// density uniform over the surface.
Vec3 sample_torus(Rng& rng) {
  constexpr double R = 1.0, r = 0.4;
  for (;;) {
    const double u = rng.uniform(0.0, 2.0 * kPi);
    const double v = rng.uniform(0.0, 2.0 * kPi);
    if (rng.uniform() * (R + r) <= R + r * std::cos(v)) {
      const double ring = R + r * std::cos(v);
      return {ring * std::cos(u), ring * std::sin(u), r * std::sin(v)};
    }
  }
}

// Half extents 1.0 x 0.7 x 0.5, faces picked by area.
Vec3 sample_box(Rng& rng) {
  const Vec3 h(1.0, 0.7, 0.5);
  const double axy = h.x() * h.y(), axz = h.x() * h.z(), ayz = h.y() * h.z();
  const double pick = rng.uniform() * (axy + axz + ayz);
  const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
  const double a = rng.uniform(-1.0, 1.0), b = rng.uniform(-1.0, 1.0);
  if (pick < axy) return {a * h.x(), b * h.y(), sign * h.z()};
  if (pick < axy + axz) return {a * h.x(), sign * h.y(), b * h.z()};
  return {sign * h.x(), a * h.y(), b * h.z()};
}

// Radius 0.5, height 1.6, with caps.
Vec3 sample_cylinder(Rng& rng) {
  constexpr double r = 0.5, h = 1.6;
  const double side = 2.0 * kPi * r * h, cap = kPi * r * r;
  const double pick = rng.uniform() * (side + 2.0 * cap);
  const double t = rng.uniform(0.0, 2.0 * kPi);
  if (pick < side) return {r * std::cos(t), r * std::sin(t), rng.uniform(-h / 2, h / 2)};
  const double rho = r * std::sqrt(rng.uniform());
  const double z = pick < side + cap ? h / 2 : -h / 2;
  return {rho * std::cos(t), rho * std::sin(t), z};
}

// Base radius 0.7 at z = -0.6, apex at z = +0.6, closed base.
Vec3 sample_cone(Rng& rng) {
  constexpr double r = 0.7, h = 1.2;
  const double slant = std::sqrt(r * r + h * h);
  const double lateral = kPi * r * slant, base = kPi * r * r;
  const double t = rng.uniform(0.0, 2.0 * kPi);
  if (rng.uniform() * (lateral + base) < lateral) {
    const double s = std::sqrt(rng.uniform());  // fraction of the way from apex to rim
    return {s * r * std::cos(t), s * r * std::sin(t), h / 2 - s * h};
  }
  const double rho = r * std::sqrt(rng.uniform());
  return {rho * std::cos(t), rho * std::sin(t), -h / 2};
}

// Radius 0.4 cylinder of height 1.0 capped by hemispheres.
Vec3 sample_capsule(Rng& rng) {
  constexpr double r = 0.4, h = 1.0;
  const double side = 2.0 * kPi * r * h, caps = 4.0 * kPi * r * r;
  if (rng.uniform() * (side + caps) < side) {
    const double t = rng.uniform(0.0, 2.0 * kPi);
    return {r * std::cos(t), r * std::sin(t), rng.uniform(-h / 2, h / 2)};
  }
  Vec3 p = r * random_direction(rng);
  p.z() += p.z() >= 0.0 ? h / 2 : -h / 2;
  return p;
}

Vec3 sample_family(ShapeFamily f, Rng& rng) {
  switch (f) {
    case ShapeFamily::sphere: return sample_sphere(rng);
    case ShapeFamily::torus: return sample_torus(rng);
    case ShapeFamily::box: return sample_box(rng);
    case ShapeFamily::cylinder: return sample_cylinder(rng);
    case ShapeFamily::cone: return sample_cone(rng);
    case ShapeFamily::capsule: return sample_capsule(rng);
  }
  throw InvalidArgument("unknown shape family");
}

// Sum of three plane waves with random directions and phases. Frequencies are
// low relative to the shape size, so the warp bends whole faces rather than
// adding local bumps that would look like defects.
struct RadialField {
  struct Wave {
    Vec3 direction;
    double frequency, phase, weight;
  };
  std::vector<Wave> waves;

  RadialField(double amplitude, Rng& rng) {
    for (int i = 0; i < 3; ++i) {
      Wave w;
      w.direction = random_direction(rng);
      w.frequency = rng.uniform(1.0, 2.5);
      w.phase = rng.uniform(0.0, 2.0 * kPi);
      w.weight = amplitude * rng.uniform(-1.0, 1.0) / 3.0;
      waves.push_back(w);
    }
  }

  double operator()(const Vec3& p) const {
    double s = 0.0;
    for (const Wave& w : waves) s += w.weight * std::sin(w.frequency * w.direction.dot(p) + w.phase);
    return s;
  }
};

}  // namespace

std::string to_string(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::sphere: return "sphere";
    case ShapeFamily::torus: return "torus";
    case ShapeFamily::box: return "box";
    case ShapeFamily::cylinder: return "cylinder";
    case ShapeFamily::cone: return "cone";
    case ShapeFamily::capsule: return "capsule";
  }
  return "sphere";
}

ShapeFamily shape_family_from_string(const std::string& s) {
  for (ShapeFamily f : all_shape_families()) {
    if (to_string(f) == s) return f;
  }
  throw ConfigError("unknown shape family '" + s + "'");
}

const std::vector<ShapeFamily>& all_shape_families() {
  static const std::vector<ShapeFamily> families{ShapeFamily::sphere,   ShapeFamily::torus,
                                                 ShapeFamily::box,      ShapeFamily::cylinder,
                                                 ShapeFamily::cone,     ShapeFamily::capsule};
  return families;
}

PointCloud generate_category(ShapeFamily family, int n_points, std::uint64_t seed,
                             double deform_amplitude) {
  if (n_points < 1) throw InvalidArgument("generate_category: n_points must be positive");
  if (deform_amplitude < 0.0 || deform_amplitude >= 1.0) {
    throw InvalidArgument("generate_category: deformation amplitude must lie in [0, 1)");
  }
  Rng rng(seed);
  const RadialField field(deform_amplitude, rng);
  Points pts(n_points, 3);
  double max_norm = 0.0;
  for (int i = 0; i < n_points; ++i) {
    Vec3 p = sample_family(family, rng);
    if (deform_amplitude > 0.0) p *= 1.0 + field(p);
    pts.row(i) = p.transpose();
    max_norm = std::max(max_norm, p.norm());
  }
  pts /= 2.0 * max_norm;
  return PointCloud(std::move(pts));
}

std::string to_string(DefectType t) {
  switch (t) {
    case DefectType::bulge: return "bulge";
    case DefectType::sink: return "sink";
    case DefectType::missing: return "missing";
  }
  return "bulge";
}

DefectType defect_type_from_string(const std::string& s) {
  if (s == "bulge") return DefectType::bulge;
  if (s == "sink") return DefectType::sink;
  if (s == "missing") return DefectType::missing;
  throw ConfigError("unknown defect type '" + s + "'");
}

DefectResult inject_defect(const PointCloud& cloud, DefectType type, double magnitude, double radius,
                           Rng& rng) {
  cloud.validate();
  if (!(radius > 0.0)) throw InvalidArgument("inject_defect: radius must be positive");
  if (magnitude < 0.0) throw InvalidArgument("inject_defect: magnitude must be non-negative");
  const int n = cloud.size();
  const Vec3 centroid = cloud.points.colwise().mean().transpose();

  if (magnitude == 0.0) {
    DefectResult r;
    r.cloud = cloud;
    r.mask.assign(static_cast<std::size_t>(n), 0);
    r.cloud.mask = r.mask;
    return r;
  }

  constexpr int kAttempts = 8;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const int ci = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
    const Vec3 c = cloud.point(ci);
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) dist[static_cast<std::size_t>(i)] = (cloud.point(i) - c).norm();

    DefectResult r;
    r.center = c;
    if (type == DefectType::missing) {
      std::vector<int> keep;
      int ring = 0;
      for (int i = 0; i < n; ++i) {
        const double d = dist[static_cast<std::size_t>(i)];
        if (d < radius) continue;
        keep.push_back(i);
        if (d < 1.5 * radius) ++ring;
      }
      r.affected = n - static_cast<int>(keep.size());
      if (r.affected == 0 || ring == 0 || keep.empty()) continue;
      Points pts(static_cast<Eigen::Index>(keep.size()), 3);
      r.mask.resize(keep.size());
      for (std::size_t j = 0; j < keep.size(); ++j) {
        pts.row(static_cast<Eigen::Index>(j)) = cloud.points.row(keep[j]);
        r.mask[j] = dist[static_cast<std::size_t>(keep[j])] < 1.5 * radius ? 1 : 0;
      }
      r.cloud = PointCloud(std::move(pts));
    } else {
      Vec3 normal = ggd::local_frame(cloud.points, ggd::radius_neighborhood(cloud.points, c, radius)).normal;
      if (normal.dot(c - centroid) < 0.0) normal = -normal;
      const double sign = type == DefectType::bulge ? 1.0 : -1.0;
      r.cloud = PointCloud(cloud.points);
      r.mask.assign(static_cast<std::size_t>(n), 0);
      for (int i = 0; i < n; ++i) {
        const double d = dist[static_cast<std::size_t>(i)];
        if (d >= radius) continue;
        const double t = 1.0 - (d / radius) * (d / radius);
        r.cloud.points.row(i) += (sign * magnitude * t * t) * normal.transpose();
        r.mask[static_cast<std::size_t>(i)] = 1;
        ++r.affected;
      }
      if (r.affected == 0) continue;
    }
    r.cloud.mask = r.mask;
    r.cloud.object_label = 1;
    r.cloud.category = cloud.category;
    return r;
  }
  throw DataError("inject_defect: affected region empty after 8 attempts");
}

}  // namespace pcad::data
