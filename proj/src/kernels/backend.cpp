#include "pcad/kernels/backend.hpp"

#include <dlfcn.h>

#include "pcad/common/error.hpp"

namespace pcad::kernels {

namespace {

void check_status(int32_t status, const std::string& backend, const char* op) {
  switch (status) {
    case PCAD_GK_OK: return;
    case PCAD_GK_INVALID_ARGUMENT: throw InvalidArgument(backend + ": " + op + " rejected its arguments");
    case PCAD_GK_INVALID_INPUT: throw InvalidInput(backend + ": " + op + " rejected non-finite input");
    default: throw NumericalError(backend + ": " + op + " failed with status " + std::to_string(status));
  }
}

std::vector<int64_t> widen(const std::vector<int>& v) { return {v.begin(), v.end()}; }

template <class Fn>
Fn resolve(void* handle, const char* symbol, const std::string& path) {
  dlerror();
  void* sym = dlsym(handle, symbol);
  if (sym == nullptr) throw ConfigError("kernel library " + path + " lacks symbol " + symbol);
  return reinterpret_cast<Fn>(sym);
}

}  // namespace

GeoKernels GeoKernels::reference() {
  GeoKernels k;
  k.table_ = {&pcad_gk_abi_version, &pcad_gk_fps, &pcad_gk_knn, &pcad_gk_geo_descriptors};
  k.name_ = "reference";
  return k;
}

GeoKernels GeoKernels::load(const std::filesystem::path& library) {
  const std::string path = library.string();
  void* raw = dlopen(path.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (raw == nullptr) {
    const char* err = dlerror();
    throw ConfigError("cannot load kernel library " + path + ": " + (err ? err : "unknown error"));
  }
  GeoKernels k;
  k.handle_ = std::shared_ptr<void>(raw, [](void* h) { dlclose(h); });
  k.table_.abi_version = resolve<decltype(k.table_.abi_version)>(raw, "pcad_gk_abi_version", path);
  const uint32_t version = k.table_.abi_version();
  if ((version >> 16) != PCAD_GK_ABI_MAJOR) {
    throw ConfigError("kernel library " + path + " implements ABI major " + std::to_string(version >> 16) +
                      ", expected " + std::to_string(PCAD_GK_ABI_MAJOR));
  }
  k.table_.fps = resolve<decltype(k.table_.fps)>(raw, "pcad_gk_fps", path);
  k.table_.knn = resolve<decltype(k.table_.knn)>(raw, "pcad_gk_knn", path);
  k.table_.geo_descriptors = resolve<decltype(k.table_.geo_descriptors)>(raw, "pcad_gk_geo_descriptors", path);
  k.name_ = "native:" + path;
  return k;
}

std::vector<int> GeoKernels::fps(const PointCloud& cloud, int g, int start) const {
  if (is_reference()) return pcad::fps(cloud, g, start);
  if (g < 1 || g > cloud.size()) throw InvalidArgument("fps: g must lie in [1, N]");
  std::vector<int64_t> out(static_cast<std::size_t>(g));
  check_status(table_.fps(cloud.points.data(), cloud.size(), g, start, out.data()), name_, "fps");
  return {out.begin(), out.end()};
}

IndexMatrix GeoKernels::knn(const Points& points, const std::vector<int>& centers, int r) const {
  if (is_reference()) return pcad::knn(points, centers, r);
  if (centers.empty()) return IndexMatrix(0, r);
  const std::vector<int64_t> c = widen(centers);
  std::vector<int64_t> out(c.size() * static_cast<std::size_t>(r));
  check_status(table_.knn(points.data(), points.rows(), c.data(), static_cast<int64_t>(c.size()), r, out.data()),
               name_, "knn");
  IndexMatrix rows(static_cast<Eigen::Index>(c.size()), r);
  for (Eigen::Index i = 0; i < rows.size(); ++i) rows.data()[i] = static_cast<int>(out[static_cast<std::size_t>(i)]);
  return rows;
}

std::vector<ggd::GeoDescriptor> GeoKernels::descriptors(const PointCloud& cloud, const std::vector<int>& centers,
                                                        double radius) const {
  if (is_reference()) return ggd::compute_geo_descriptors(cloud, centers, radius);
  if (centers.empty()) return {};
  const std::vector<int64_t> c = widen(centers);
  std::vector<double> flat(c.size() * PCAD_GK_DESCRIPTOR_STRIDE);
  std::vector<int32_t> fallback(c.size());
  check_status(table_.geo_descriptors(cloud.points.data(), cloud.size(), c.data(), static_cast<int64_t>(c.size()),
                                      radius, flat.data(), fallback.data()),
               name_, "geo_descriptors");
  std::vector<ggd::GeoDescriptor> out(c.size());
  for (std::size_t m = 0; m < c.size(); ++m) {
    const double* o = flat.data() + m * PCAD_GK_DESCRIPTOR_STRIDE;
    out[m].normal = Vec3(o[0], o[1], o[2]);
    out[m].curvature = o[3];
    out[m].v_norm = o[4];
    out[m].v_curv = o[5];
    out[m].fallback = fallback[m] != 0;
  }
  return out;
}

GroupSet GeoKernels::build_groups(const PointCloud& cloud, int g, const Resolutions& resolutions) const {
  if (is_reference()) return pcad::build_groups(cloud, g, resolutions);
  return build_groups_with(
      cloud, g, resolutions, [this](const PointCloud& c, int n, int start) { return fps(c, n, start); },
      [this](const Points& p, const std::vector<int>& centers, int r) { return knn(p, centers, r); });
}

std::vector<ggd::GeoDescriptor> GeoKernels::descriptors(const PointCloud& cloud, const GroupSet& groups) const {
  return descriptors(cloud, groups.center_indices, groups.adaptive_radius);
}

GeoKernels select_kernels(const std::string& selection, const std::string& library) {
  if (selection == "reference") return GeoKernels::reference();
  if (selection == "native") {
    if (library.empty()) throw ConfigError("kernels = native requires kernel_library");
    return GeoKernels::load(library);
  }
  throw ConfigError("unknown kernel selection '" + selection + "' (expected reference or native)");
}

}  // namespace pcad::kernels
