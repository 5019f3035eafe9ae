#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pcad/ggd/geometry.hpp"
#include "pcad/kernels/geo_kernels.h"
#include "pcad/pc/grouping.hpp"

namespace pcad::kernels {

/// Function table matching geo_kernels.h.
struct KernelTable {
  uint32_t (*abi_version)(void) = nullptr;
  int32_t (*fps)(const double*, int64_t, int64_t, int64_t, int64_t*) = nullptr;
  int32_t (*knn)(const double*, int64_t, const int64_t*, int64_t, int64_t, int64_t*) = nullptr;
  int32_t (*geo_descriptors)(const double*, int64_t, const int64_t*, int64_t, double, double*, int32_t*) = nullptr;
};

/// Geometry kernels behind the flat-array contract: either the in-process
/// reference or a shared library loaded at runtime. Copies share the library
/// handle, which is closed with the last copy.
class GeoKernels {
 public:
  /// In-process reference implementation.
  static GeoKernels reference();
  /// Loads a kernel library. Throws ConfigError when the file cannot be
  /// opened, a symbol is missing or the ABI major version differs.
  static GeoKernels load(const std::filesystem::path& library);

  const std::string& name() const { return name_; }
  bool is_reference() const { return handle_ == nullptr; }

  std::vector<int> fps(const PointCloud& cloud, int g, int start = 0) const;
  IndexMatrix knn(const Points& points, const std::vector<int>& centers, int r) const;
  std::vector<ggd::GeoDescriptor> descriptors(const PointCloud& cloud, const std::vector<int>& centers,
                                              double radius) const;
  GroupSet build_groups(const PointCloud& cloud, int g, const Resolutions& resolutions) const;
  std::vector<ggd::GeoDescriptor> descriptors(const PointCloud& cloud, const GroupSet& groups) const;

 private:
  KernelTable table_;
  std::shared_ptr<void> handle_;
  std::string name_;
};

/// Resolves the kernel selection config flag: "reference" or "native". The
/// native choice needs a library path.
GeoKernels select_kernels(const std::string& selection, const std::string& library);

}  // namespace pcad::kernels
