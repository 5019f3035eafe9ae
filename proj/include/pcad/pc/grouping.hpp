#pragma once

#include <array>
#include <functional>
#include <map>
#include <vector>

#include "pcad/pc/cloud.hpp"

namespace pcad {

using IndexMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Neighborhood sizes (fine, base, coarse). The default is {k/2, k, 2k}.
struct Resolutions {
  int fine = 0;
  int base = 0;
  int coarse = 0;

  static Resolutions symmetric(int k) { return {k / 2, k, 2 * k}; }
  std::array<int, 3> as_array() const { return {fine, base, coarse}; }
  int max() const;
};

/// FPS centers shared by every resolution, plus the kNN index rows around
/// each center. Rows are ordered by increasing distance, ties by index.
struct GroupSet {
  std::vector<int> center_indices;
  Points centers;
  std::map<int, IndexMatrix> neighborhoods;
  Resolutions resolutions;
  double adaptive_radius = 0.0;
  bool degenerate = false;

  int size() const { return static_cast<int>(center_indices.size()); }
  bool has(int r) const { return neighborhoods.count(r) != 0; }
  /// Throws InvalidArgument when resolution r was not built.
  const IndexMatrix& at(int r) const;
};

struct RadiusEstimate {
  double radius = 0.0;
  bool degenerate = false;
};

/// Greedy farthest point sampling. Each pick maximizes the squared distance
/// to the already-selected set; ties go to the lowest index.
std::vector<int> fps(const PointCloud& cloud, int g, int start = 0);

/// The r nearest points to each listed center, sorted by (distance, index).
IndexMatrix knn(const Points& points, const std::vector<int>& centers, int r);

GroupSet build_groups(const PointCloud& cloud, int g, int k);
/// Explicit resolutions; resolutions.max() must not exceed N.
GroupSet build_groups(const PointCloud& cloud, int g, const Resolutions& resolutions);

using FpsFn = std::function<std::vector<int>(const PointCloud&, int g, int start)>;
using KnnFn = std::function<IndexMatrix(const Points&, const std::vector<int>& centers, int r)>;

/// build_groups with injected FPS and kNN implementations (e.g. an external
/// kernel library). The implementations must honor the fps/knn contracts.
GroupSet build_groups_with(const PointCloud& cloud, int g, const Resolutions& resolutions,
                           const FpsFn& fps_fn, const KnnFn& knn_fn);

/// Mean distance from each center to its k-th nearest neighbor at the base
/// resolution. The center is its own first neighbor, so the k-th neighbor is
/// the last entry of a size-k row.
RadiusEstimate estimate_adaptive_radius(const PointCloud& cloud, const GroupSet& groups, int k);

}  // namespace pcad
