#include "pcad/pc/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "pcad/common/error.hpp"

namespace pcad {

int Resolutions::max() const { return std::max({fine, base, coarse}); }

const IndexMatrix& GroupSet::at(int r) const {
  auto it = neighborhoods.find(r);
  if (it == neighborhoods.end()) {
    throw InvalidArgument("group set has no neighborhood of size " + std::to_string(r));
  }
  return it->second;
}

std::vector<int> fps(const PointCloud& cloud, int g, int start) {
  cloud.validate();
  const int n = cloud.size();
  if (g < 1) throw InvalidArgument("fps: g must be positive");
  if (g > n) {
    throw InvalidArgument("fps: g=" + std::to_string(g) + " exceeds point count " +
                          std::to_string(n));
  }
  if (start < 0 || start >= n) throw InvalidArgument("fps: start index out of range");

  const double* data = cloud.points.data();
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<int> picked;
  picked.reserve(g);
  int current = start;
  for (int step = 0; step < g; ++step) {
    picked.push_back(current);
    min_d2[current] = -1.0;  // never re-selected
    const double* c = data + 3 * current;
    int best = -1;
    double best_d = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
      if (min_d2[i] < 0.0) continue;
      const double d = squared_distance(data + 3 * i, c);
      if (d < min_d2[i]) min_d2[i] = d;
      if (min_d2[i] > best_d) {
        best_d = min_d2[i];
        best = i;
      }
    }
    current = best;
  }
  return picked;
}

IndexMatrix knn(const Points& points, const std::vector<int>& centers, int r) {
  const int n = static_cast<int>(points.rows());
  if (r < 1 || r > n) {
    throw InvalidArgument("knn: neighborhood size " + std::to_string(r) +
                          " outside [1, " + std::to_string(n) + "]");
  }
  IndexMatrix out(static_cast<Eigen::Index>(centers.size()), r);
  std::vector<std::pair<double, int>> dist(n);
  const double* data = points.data();
  for (std::size_t m = 0; m < centers.size(); ++m) {
    if (centers[m] < 0 || centers[m] >= n) throw InvalidArgument("knn: center index out of range");
    const double* c = data + 3 * centers[m];
    for (int i = 0; i < n; ++i) dist[i] = {squared_distance(data + 3 * i, c), i};
    // pair ordering is (distance, index), which is the tie rule.
    std::partial_sort(dist.begin(), dist.begin() + r, dist.end());
    for (int j = 0; j < r; ++j) out(static_cast<Eigen::Index>(m), j) = dist[j].second;
  }
  return out;
}

GroupSet build_groups(const PointCloud& cloud, int g, int k) {
  if (k < 2 || k % 2 != 0) {
    throw InvalidArgument("build_groups: base size k must be even and >= 2, got " +
                          std::to_string(k));
  }
  return build_groups(cloud, g, Resolutions::symmetric(k));
}

GroupSet build_groups(const PointCloud& cloud, int g, const Resolutions& res) {
  return build_groups_with(
      cloud, g, res, [](const PointCloud& c, int n, int start) { return fps(c, n, start); },
      [](const Points& p, const std::vector<int>& centers, int r) { return knn(p, centers, r); });
}

GroupSet build_groups_with(const PointCloud& cloud, int g, const Resolutions& res, const FpsFn& fps_fn,
                           const KnnFn& knn_fn) {
  cloud.validate();
  if (res.fine < 1 || res.base < 1 || res.coarse < 1) {
    throw InvalidArgument("build_groups: resolutions must be positive");
  }
  if (res.max() > cloud.size()) {
    throw InvalidArgument("build_groups: largest neighborhood " + std::to_string(res.max()) +
                          " exceeds point count " + std::to_string(cloud.size()));
  }
  GroupSet groups;
  groups.resolutions = res;
  groups.center_indices = fps_fn(cloud, g, 0);
  groups.centers.resize(g, 3);
  for (int m = 0; m < g; ++m) groups.centers.row(m) = cloud.points.row(groups.center_indices[m]);
  // The coarse rows are sorted, so every smaller resolution is a prefix.
  const IndexMatrix widest = knn_fn(cloud.points, groups.center_indices, res.max());
  for (int r : res.as_array()) groups.neighborhoods[r] = widest.leftCols(r);
  const RadiusEstimate est = estimate_adaptive_radius(cloud, groups, res.base);
  groups.adaptive_radius = est.radius;
  groups.degenerate = est.degenerate;
  return groups;
}

RadiusEstimate estimate_adaptive_radius(const PointCloud& cloud, const GroupSet& groups, int k) {
  const IndexMatrix& rows = groups.at(k);
  if (rows.rows() == 0) throw InvalidArgument("estimate_adaptive_radius: no centers");
  double total = 0.0;
  for (Eigen::Index m = 0; m < rows.rows(); ++m) {
    const double* c = cloud.points.data() + 3 * groups.center_indices[m];
    const double* far = cloud.points.data() + 3 * rows(m, k - 1);
    total += std::sqrt(squared_distance(c, far));
  }
  RadiusEstimate est;
  est.radius = total / static_cast<double>(rows.rows());
  // Zero only when every k-th neighbor coincides with its center.
  if (est.radius <= 0.0) {
    est.degenerate = true;
    est.radius = 0.0;
  }
  return est;
}

}  // namespace pcad
