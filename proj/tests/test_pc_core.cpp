#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "pcad/common/error.hpp"
#include "pcad/pc/grouping.hpp"
#include "pcad/pc/ply.hpp"
#include "support/oracles.hpp"

using namespace pcad;
using pcad::testing::brute_fps;
using pcad::testing::brute_knn_row;

namespace {

PointCloud cloud_of(std::initializer_list<std::array<double, 3>> pts) {
  Points p(static_cast<Eigen::Index>(pts.size()), 3);
  int i = 0;
  for (const auto& q : pts) p.row(i++) << q[0], q[1], q[2];
  return PointCloud(p);
}

}  // namespace

TEST(PointCloud, ValidateRejectsBadInput) {
  EXPECT_THROW(PointCloud().validate(), InvalidInput);
  PointCloud c = cloud_of({{0, 0, 0}, {1, 0, 0}});
  EXPECT_NO_THROW(c.validate());
  c.mask = std::vector<std::uint8_t>{1};
  EXPECT_THROW(c.validate(), InvalidInput);
  c.mask.reset();
  c.object_label = 2;
  EXPECT_THROW(c.validate(), InvalidInput);
  c.object_label.reset();
  c.points(1, 2) = std::nan("");
  EXPECT_THROW(c.validate(), InvalidInput);
}

TEST(PointCloud, UnitSphereNormalization) {
  Rng rng(3);
  PointCloud c(pcad::testing::random_points(50, rng, 4.0));
  const PointCloud n = normalize_unit_sphere(c);
  EXPECT_NEAR(n.points.colwise().mean().norm(), 0.0, 1e-12);
  EXPECT_NEAR(n.points.rowwise().norm().maxCoeff(), 1.0, 1e-12);
}

TEST(Fps, SinglePoint) {
  EXPECT_EQ(fps(cloud_of({{1, 2, 3}}), 1), std::vector<int>{0});
}

TEST(Fps, CollinearPicksExtremes) {
  const PointCloud c = cloud_of({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {10, 0, 0}});
  EXPECT_EQ(fps(c, 2, 0), (std::vector<int>{0, 3}));
}

TEST(Fps, FullExhaustionIsGreedyOrderPermutation) {
  Rng rng(5);
  const PointCloud c(pcad::testing::random_points(40, rng));
  const std::vector<int> sel = fps(c, 40);
  EXPECT_EQ(std::set<int>(sel.begin(), sel.end()).size(), 40u);
  EXPECT_EQ(sel, brute_fps(c.points, 40, 0));
}

TEST(Fps, Errors) {
  const PointCloud c = cloud_of({{0, 0, 0}, {1, 0, 0}});
  EXPECT_THROW(fps(c, 3), InvalidArgument);
  EXPECT_THROW(fps(c, 0), InvalidArgument);
  EXPECT_THROW(fps(c, 1, 2), InvalidArgument);
  PointCloud bad = c;
  bad.points(0, 0) = INFINITY;
  EXPECT_THROW(fps(bad, 1), InvalidInput);
}

TEST(Fps, MatchesBruteForceWithTies) {
  Rng rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 5 + static_cast<int>(rng.index(120));
    const Points p = trial % 2 ? pcad::testing::tie_heavy_points(n, rng) : pcad::testing::random_points(n, rng);
    const int g = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
    const int start = static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
    EXPECT_EQ(fps(PointCloud(p), g, start), brute_fps(p, g, start)) << "trial " << trial;
  }
}

TEST(Knn, CircleNeighbors) {
  Points p(8, 3);
  for (int i = 0; i < 8; ++i) {
    const double a = 2.0 * std::numbers::pi * i / 8.0;
    p.row(i) << std::cos(a), std::sin(a), 0.0;
  }
  const GroupSet gs = build_groups(PointCloud(p), 2, 2);
  ASSERT_EQ(gs.center_indices.size(), 2u);
  const IndexMatrix& rows = gs.at(2);
  for (int m = 0; m < 2; ++m) {
    const int c = gs.center_indices[m];
    EXPECT_EQ(rows(m, 0), c);
    // Both angular neighbors are equidistant; the lower index wins.
    const int left = (c + 7) % 8, right = (c + 1) % 8;
    EXPECT_EQ(rows(m, 1), std::min(left, right));
  }
}

TEST(Knn, WidestNeighborhoodCoversCloud) {
  Rng rng(2);
  const PointCloud c(pcad::testing::random_points(16, rng));
  const GroupSet gs = build_groups(c, 4, 8);
  const IndexMatrix& rows = gs.at(16);
  for (Eigen::Index m = 0; m < rows.rows(); ++m) {
    std::set<int> s(rows.row(m).data(), rows.row(m).data() + rows.cols());
    EXPECT_EQ(s.size(), 16u);
  }
}

TEST(Knn, DuplicatesFillNearestSlots) {
  const PointCloud c = cloud_of({{0, 0, 0}, {5, 0, 0}, {0, 0, 0}, {1, 0, 0}, {0, 0, 0}});
  const IndexMatrix rows = knn(c.points, {2}, 4);
  EXPECT_EQ(rows(0, 0), 0);
  EXPECT_EQ(rows(0, 1), 2);
  EXPECT_EQ(rows(0, 2), 4);
  EXPECT_EQ(rows(0, 3), 3);
}

TEST(Knn, MatchesBruteForceWithTies) {
  Rng rng(13);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 4 + static_cast<int>(rng.index(100));
    const Points p = trial % 2 ? pcad::testing::tie_heavy_points(n, rng) : pcad::testing::random_points(n, rng);
    const int r = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(n)));
    std::vector<int> centers;
    for (int m = 0; m < 5; ++m) centers.push_back(static_cast<int>(rng.index(static_cast<std::uint64_t>(n))));
    const IndexMatrix rows = knn(p, centers, r);
    for (int m = 0; m < 5; ++m) {
      const std::vector<int> expect = brute_knn_row(p, centers[m], r);
      EXPECT_EQ(std::vector<int>(rows.row(m).data(), rows.row(m).data() + r), expect) << "trial " << trial;
    }
  }
}

TEST(BuildGroups, SharedCentersAcrossResolutions) {
  Rng rng(17);
  const PointCloud c(pcad::testing::random_points(100, rng));
  const GroupSet gs = build_groups(c, 10, 8);
  EXPECT_EQ(gs.resolutions.fine, 4);
  EXPECT_EQ(gs.resolutions.coarse, 16);
  for (int r : {4, 8, 16}) {
    const IndexMatrix& rows = gs.at(r);
    ASSERT_EQ(rows.rows(), 10);
    ASSERT_EQ(rows.cols(), r);
    for (int m = 0; m < 10; ++m) EXPECT_EQ(rows(m, 0), gs.center_indices[m]);
  }
  EXPECT_EQ(gs.at(4), gs.at(16).leftCols(4));
  EXPECT_THROW(gs.at(5), InvalidArgument);
}

TEST(BuildGroups, Errors) {
  Rng rng(1);
  const PointCloud c(pcad::testing::random_points(20, rng));
  EXPECT_THROW(build_groups(c, 4, 12), InvalidArgument);  // 2k > N
  EXPECT_NO_THROW(build_groups(c, 4, 10));
  EXPECT_THROW(build_groups(c, 21, 4), InvalidArgument);
}

TEST(AdaptiveRadius, UnitGrid) {
  Points p(25, 3);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) p.row(5 * i + j) << i, j, 0.0;
  }
  // Interior centers have 4 neighbors at distance 1, so with k = 2 the
  // second-nearest (self first) sits at 1 for every center.
  const PointCloud c(p);
  const GroupSet gs = build_groups(c, 5, 2);
  EXPECT_NEAR(gs.adaptive_radius, 1.0, 1e-12);
  EXPECT_FALSE(gs.degenerate);
}

TEST(AdaptiveRadius, ScalesLinearly) {
  Rng rng(19);
  const PointCloud c(pcad::testing::random_points(64, rng));
  PointCloud s = c;
  s.points *= 4.0;  // power of two, so the scaling is exact
  EXPECT_DOUBLE_EQ(build_groups(s, 8, 8).adaptive_radius, 4.0 * build_groups(c, 8, 8).adaptive_radius);
}

TEST(AdaptiveRadius, CoincidentCloudIsDegenerate) {
  PointCloud c(Points::Constant(10, 3, 0.25));
  const GroupSet gs = build_groups(c, 3, 2);
  EXPECT_EQ(gs.adaptive_radius, 0.0);
  EXPECT_TRUE(gs.degenerate);
}

TEST(Ply, RoundTripKeepsPrecisionAndMask) {
  Rng rng(23);
  PointCloud c(pcad::testing::random_points(12, rng));
  c.mask = std::vector<std::uint8_t>{0, 1, 0, 0, 1, 0, 0, 0, 0, 1, 1, 0};
  const PointCloud back = parse_ply(format_ply(c));
  EXPECT_EQ(back.points, c.points);
  ASSERT_TRUE(back.mask.has_value());
  EXPECT_EQ(*back.mask, *c.mask);
}

TEST(Ply, ScoresWrittenAsProperty) {
  PointCloud c = cloud_of({{0, 0, 0}, {1, 1, 1}});
  const std::vector<double> s{0.25, 0.75};
  const std::string text = format_ply(c, std::span<const double>(s));
  EXPECT_NE(text.find("property double score"), std::string::npos);
  EXPECT_EQ(parse_ply(text).points, c.points);
}

TEST(Ply, MalformedInput) {
  EXPECT_THROW(parse_ply("not a ply"), InvalidInput);
  EXPECT_THROW(parse_ply("ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
                         "property double z\nend_header\n0 0 0\n"),
               InvalidInput);
  EXPECT_THROW(read_ply("/nonexistent/file.ply"), DataError);
}
