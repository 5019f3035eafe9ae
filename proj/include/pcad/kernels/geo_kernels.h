/*
 * Flat-array boundary for accelerated geometry kernels.
 *
 * A kernel library is a shared object exporting every function below with C
 * linkage. The host checks pcad_gk_abi_version() before resolving anything
 * else and refuses a library whose major version differs from
 * PCAD_GK_ABI_MAJOR. Any change to a name, argument order, unit or output
 * layout bumps the major version; additions bump the minor version.
 *
 * Conventions shared by all functions:
 *   - points is row-major x,y,z per point, length 3 * n_points, all finite.
 *   - Indices are 0-based int64 into the point array.
 *   - Distances are Euclidean in the caller's model units.
 *   - Ties in FPS and kNN go to the lowest index.
 *   - Output buffers are allocated by the caller at exactly the documented
 *     size and are fully written on PCAD_GK_OK. On any other status their
 *     contents are unspecified.
 *   - Functions are reentrant and keep no state between calls.
 */
#ifndef PCAD_KERNELS_GEO_KERNELS_H
#define PCAD_KERNELS_GEO_KERNELS_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define PCAD_GK_ABI_MAJOR 1
#define PCAD_GK_ABI_MINOR 0
#define PCAD_GK_ABI_VERSION ((PCAD_GK_ABI_MAJOR << 16) | PCAD_GK_ABI_MINOR)

/* Values per center in the descriptor output buffer. */
#define PCAD_GK_DESCRIPTOR_STRIDE 6

typedef enum pcad_gk_status {
  PCAD_GK_OK = 0,
  PCAD_GK_INVALID_ARGUMENT = 1, /* sizes, counts or indices out of contract */
  PCAD_GK_INVALID_INPUT = 2,    /* non-finite coordinates */
  PCAD_GK_INTERNAL = 3
} pcad_gk_status;

/* (major << 16) | minor of the implemented contract. */
uint32_t pcad_gk_abi_version(void);

/*
 * Greedy farthest point sampling.
 *   out_indices: length g. out_indices[0] = start; each later entry maximizes
 *   the squared distance to the already-selected set.
 *   Requires 1 <= g <= n_points and 0 <= start < n_points.
 */
int32_t pcad_gk_fps(const double* points, int64_t n_points, int64_t g, int64_t start,
                    int64_t* out_indices);

/*
 * r nearest neighbors of each center point, sorted by (distance, index).
 *   centers: length g, indices into points.
 *   out_indices: length g * r, row m holds the neighbors of centers[m].
 *   Requires 1 <= r <= n_points.
 */
int32_t pcad_gk_knn(const double* points, int64_t n_points, const int64_t* centers, int64_t g,
                    int64_t r, int64_t* out_indices);

/*
 * Per-center local surface descriptors over radius balls.
 *   centers: length g, indices into points.
 *   radius: ball radius (inclusive), >= 0. A ball with fewer than 3 points
 *   is replaced by the 3 nearest points.
 *   out_descriptors: length g * PCAD_GK_DESCRIPTOR_STRIDE, per center
 *     [nx, ny, nz, curvature, v_norm, v_curv]
 *   where n is the unit normal with positive z (ties: x, then y), curvature
 *   is lambda0 / (lambda0 + lambda1 + lambda2) in [0, 1/3], v_norm is the
 *   mean unsigned normal angle (radians) to ball members and v_curv the mean
 *   absolute curvature difference to ball members.
 *   out_fallback: length g, or NULL. 1 where the 3-nearest fallback was used.
 */
int32_t pcad_gk_geo_descriptors(const double* points, int64_t n_points, const int64_t* centers,
                                int64_t g, double radius, double* out_descriptors,
                                int32_t* out_fallback);

#ifdef __cplusplus
}
#endif

#endif /* PCAD_KERNELS_GEO_KERNELS_H */
