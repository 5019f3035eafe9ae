// A kernel library that reports a different ABI major version. Every entry
// point exists so only the version check can reject it.
#include "pcad/kernels/geo_kernels.h"

extern "C" {

uint32_t pcad_gk_abi_version(void) { return (uint32_t{PCAD_GK_ABI_MAJOR + 1} << 16) | 0u; }

int32_t pcad_gk_fps(const double*, int64_t, int64_t, int64_t, int64_t*) { return PCAD_GK_INTERNAL; }

int32_t pcad_gk_knn(const double*, int64_t, const int64_t*, int64_t, int64_t, int64_t*) {
  return PCAD_GK_INTERNAL;
}

int32_t pcad_gk_geo_descriptors(const double*, int64_t, const int64_t*, int64_t, double, double*, int32_t*) {
  return PCAD_GK_INTERNAL;
}
}
