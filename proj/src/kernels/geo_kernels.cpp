// Reference implementation of the flat-array kernel contract, backed by the
// pc-core and ggd routines.

#include "pcad/kernels/geo_kernels.h"

#include <cmath>
#include <limits>
#include <vector>

#include "pcad/common/error.hpp"
#include "pcad/ggd/geometry.hpp"
#include "pcad/pc/grouping.hpp"

namespace {

using pcad::PointCloud;

constexpr int64_t kMaxCount = std::numeric_limits<int>::max();

PointCloud wrap(const double* points, int64_t n) {
  if (points == nullptr || n < 1 || n > kMaxCount / 3) throw pcad::InvalidArgument("bad point buffer");
  pcad::Points pts(n, 3);
  std::copy(points, points + 3 * n, pts.data());
  return PointCloud(std::move(pts));
}

std::vector<int> to_int_indices(const int64_t* centers, int64_t g, int64_t n) {
  if (centers == nullptr || g < 1 || g > kMaxCount) throw pcad::InvalidArgument("bad center buffer");
  std::vector<int> out(static_cast<std::size_t>(g));
  for (int64_t i = 0; i < g; ++i) {
    if (centers[i] < 0 || centers[i] >= n) throw pcad::InvalidArgument("center index out of range");
    out[static_cast<std::size_t>(i)] = static_cast<int>(centers[i]);
  }
  return out;
}

template <class F>
int32_t guarded(F&& body) {
  try {
    body();
    return PCAD_GK_OK;
  } catch (const pcad::InvalidArgument&) {
    return PCAD_GK_INVALID_ARGUMENT;
  } catch (const pcad::InvalidInput&) {
    return PCAD_GK_INVALID_INPUT;
  } catch (...) {
    return PCAD_GK_INTERNAL;
  }
}

}  // namespace

extern "C" {

uint32_t pcad_gk_abi_version(void) { return PCAD_GK_ABI_VERSION; }

int32_t pcad_gk_fps(const double* points, int64_t n_points, int64_t g, int64_t start, int64_t* out_indices) {
  return guarded([&] {
    if (out_indices == nullptr) throw pcad::InvalidArgument("null output");
    const PointCloud cloud = wrap(points, n_points);
    if (g < 1 || g > n_points || start < 0 || start >= n_points) throw pcad::InvalidArgument("bad g or start");
    const std::vector<int> idx = pcad::fps(cloud, static_cast<int>(g), static_cast<int>(start));
    for (std::size_t i = 0; i < idx.size(); ++i) out_indices[i] = idx[i];
  });
}

int32_t pcad_gk_knn(const double* points, int64_t n_points, const int64_t* centers, int64_t g, int64_t r,
                    int64_t* out_indices) {
  return guarded([&] {
    if (out_indices == nullptr) throw pcad::InvalidArgument("null output");
    const PointCloud cloud = wrap(points, n_points);
    cloud.validate();
    const std::vector<int> c = to_int_indices(centers, g, n_points);
    if (r < 1 || r > n_points) throw pcad::InvalidArgument("bad r");
    const pcad::IndexMatrix rows = pcad::knn(cloud.points, c, static_cast<int>(r));
    for (Eigen::Index i = 0; i < rows.size(); ++i) out_indices[i] = rows.data()[i];
  });
}

int32_t pcad_gk_geo_descriptors(const double* points, int64_t n_points, const int64_t* centers, int64_t g,
                                double radius, double* out_descriptors, int32_t* out_fallback) {
  return guarded([&] {
    if (out_descriptors == nullptr) throw pcad::InvalidArgument("null output");
    const PointCloud cloud = wrap(points, n_points);
    const std::vector<int> c = to_int_indices(centers, g, n_points);
    const auto desc = pcad::ggd::compute_geo_descriptors(cloud, c, radius);
    for (std::size_t m = 0; m < desc.size(); ++m) {
      double* o = out_descriptors + m * PCAD_GK_DESCRIPTOR_STRIDE;
      o[0] = desc[m].normal.x();
      o[1] = desc[m].normal.y();
      o[2] = desc[m].normal.z();
      o[3] = desc[m].curvature;
      o[4] = desc[m].v_norm;
      o[5] = desc[m].v_curv;
      if (out_fallback != nullptr) out_fallback[m] = desc[m].fallback ? 1 : 0;
    }
  });
}

}  // extern "C"
