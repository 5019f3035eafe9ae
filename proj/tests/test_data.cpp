#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "pcad/common/error.hpp"
#include "pcad/data/manifest.hpp"
#include "pcad/data/synth.hpp"
#include "pcad/pc/grouping.hpp"

using namespace pcad;
using namespace pcad::data;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pcad_test_data_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

SynthConfig small_config() {
  SynthConfig c;
  c.n_points = 256;
  c.train_per_category = 8;
  c.test_per_category = 8;
  return c;
}

}  // namespace

TEST(Synth, SphereWithoutDeformationHasRadiusHalf) {
  const PointCloud c = generate_category(ShapeFamily::sphere, 500, 1, 0.0);
  EXPECT_LT((c.points.rowwise().norm().array() - 0.5).abs().maxCoeff(), 1e-6);
}

TEST(Synth, SeededAndScaled) {
  for (ShapeFamily f : all_shape_families()) {
    const PointCloud a = generate_category(f, 300, 7);
    EXPECT_EQ(a.points, generate_category(f, 300, 7).points) << to_string(f);
    EXPECT_NE(a.points, generate_category(f, 300, 8).points) << to_string(f);
    EXPECT_NEAR(a.points.rowwise().norm().maxCoeff(), 0.5, 1e-12) << to_string(f);
    EXPECT_EQ(shape_family_from_string(to_string(f)), f);
  }
  EXPECT_THROW(shape_family_from_string("teapot"), ConfigError);
}

TEST(Synth, UniformSurfaceSpacing) {
  // On a sphere of radius R with n uniform points the mean nearest-neighbor
  // distance is about 0.5 * sqrt(4 pi R^2 / n) (planar Poisson process).
  const int n = 4000;
  const PointCloud c = generate_category(ShapeFamily::sphere, n, 3, 0.0);
  const IndexMatrix nn = knn(c.points, [&] {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    return all;
  }(), 2);
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += (c.points.row(i) - c.points.row(nn(i, 1))).norm();
  mean /= n;
  const double expected = 0.5 * std::sqrt(4.0 * std::numbers::pi * 0.25 / n);
  EXPECT_NEAR(mean / expected, 1.0, 0.05);
}

TEST(Defect, ZeroMagnitudeIsIdentity) {
  const PointCloud c = generate_category(ShapeFamily::torus, 400, 2);
  Rng rng(1);
  const DefectResult r = inject_defect(c, DefectType::bulge, 0.0, 0.1, rng);
  EXPECT_EQ(r.cloud.points, c.points);
  EXPECT_EQ(r.mask, std::vector<std::uint8_t>(400, 0));
}

TEST(Defect, BulgeOnSphereMovesMaskedPointsOutward) {
  const PointCloud c = generate_category(ShapeFamily::sphere, 1000, 4, 0.0);
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(s);
    const DefectResult r = inject_defect(c, DefectType::bulge, 0.05, 0.1, rng);
    ASSERT_GT(r.affected, 0);
    EXPECT_EQ(r.cloud.object_label, 1);
    for (int i = 0; i < 1000; ++i) {
      const double before = c.points.row(i).norm();
      const double after = r.cloud.points.row(i).norm();
      if (r.mask[i]) {
        EXPECT_GT(after, before);
        EXPECT_GT(after, 0.5 - 1e-12);
      } else {
        EXPECT_LE(after, 0.5 + 1e-6);
      }
    }
  }
}

TEST(Defect, SinkMovesInward) {
  const PointCloud c = generate_category(ShapeFamily::sphere, 1000, 4, 0.0);
  Rng rng(9);
  const DefectResult r = inject_defect(c, DefectType::sink, 0.05, 0.1, rng);
  for (int i = 0; i < 1000; ++i) {
    if (r.mask[i]) EXPECT_LT(r.cloud.points.row(i).norm(), c.points.row(i).norm());
  }
}

TEST(Defect, MissingRemovesExactlyTheBall) {
  const PointCloud c = generate_category(ShapeFamily::box, 800, 5);
  for (std::uint64_t s = 0; s < 5; ++s) {
    Rng rng(s);
    const DefectResult r = inject_defect(c, DefectType::missing, 0.05, 0.12, rng);
    int inside = 0, ring = 0;
    for (int i = 0; i < 800; ++i) {
      const double d = (c.point(i) - r.center).norm();
      inside += d < 0.12 ? 1 : 0;
      ring += d >= 0.12 && d < 0.18 ? 1 : 0;
    }
    EXPECT_EQ(r.cloud.size(), 800 - inside);
    EXPECT_EQ(r.affected, inside);
    int masked = 0;
    for (auto m : r.mask) masked += m;
    EXPECT_EQ(masked, ring);
  }
}

TEST(Defect, BadArguments) {
  const PointCloud c = generate_category(ShapeFamily::sphere, 100, 1);
  Rng rng(1);
  EXPECT_THROW(inject_defect(c, DefectType::bulge, 0.1, 0.0, rng), InvalidArgument);
  EXPECT_THROW(inject_defect(c, DefectType::bulge, -0.1, 0.1, rng), InvalidArgument);
  EXPECT_THROW(defect_type_from_string("crack"), ConfigError);
}

TEST(Dataset, CountsAndLabels) {
  const Dataset d = generate_dataset(small_config());
  EXPECT_EQ(d.train.size(), 24u);
  EXPECT_EQ(d.test.size(), 24u);
  EXPECT_EQ(d.manifest.categories.size(), 3u);
  for (const Sample& s : d.train) {
    EXPECT_EQ(s.entry.object_label, 0);
    EXPECT_EQ(s.entry.split, "train");
  }
  int anomalous = 0;
  for (const Sample& s : d.test) {
    anomalous += s.entry.object_label;
    if (s.entry.object_label) {
      ASSERT_TRUE(s.cloud.mask.has_value());
      EXPECT_GT(std::count(s.cloud.mask->begin(), s.cloud.mask->end(), 1), 0);
      EXPECT_NE(s.entry.defect_type, "none");
    }
  }
  EXPECT_EQ(anomalous, 12);
  EXPECT_NO_THROW(d.manifest.validate());
}

TEST(Dataset, DefaultMirrorsFourTrainingSamples) { EXPECT_EQ(SynthConfig{}.train_per_category, 4); }

TEST(Dataset, BuildWritesFilesAndIsDeterministic) {
  const fs::path a = scratch("a"), b = scratch("b");
  const DatasetManifest m = build_dataset(small_config(), a);
  build_dataset(small_config(), b);
  EXPECT_EQ(slurp(a / "manifest.json"), slurp(b / "manifest.json"));
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) files += e.path().extension() == ".ply" ? 1 : 0;
  EXPECT_EQ(files, 48);
  const Dataset loaded = load_dataset(a / "manifest.json");
  const Dataset memory = generate_dataset(small_config());
  ASSERT_EQ(loaded.test.size(), memory.test.size());
  for (std::size_t i = 0; i < loaded.test.size(); ++i) {
    EXPECT_EQ(loaded.test[i].cloud.points, memory.test[i].cloud.points);
    EXPECT_EQ(loaded.test[i].cloud.category, memory.test[i].cloud.category);
  }
  EXPECT_EQ(m.count("train"), 24u);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Dataset, RejectsDefectiveTrainingSample) {
  const fs::path dir = scratch("bad");
  build_dataset(small_config(), dir);
  DatasetManifest m = load_manifest(dir / "manifest.json");
  // Point a training entry at an anomalous test cloud.
  const auto test_entry = std::find_if(m.samples.begin(), m.samples.end(),
                                       [](const SampleEntry& e) { return e.object_label == 1; });
  const auto train_entry = std::find_if(m.samples.begin(), m.samples.end(),
                                        [](const SampleEntry& e) { return e.split == "train"; });
  train_entry->path = test_entry->path;
  save_manifest(dir / "manifest.json", m);
  EXPECT_THROW(load_dataset(dir / "manifest.json"), DataError);
  fs::remove_all(dir);
}

TEST(Dataset, MissingFileNamesPath) {
  try {
    load_dataset("/nonexistent/dir/manifest.json");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir"), std::string::npos);
  }
}

TEST(Dataset, ConfigParsing) {
  const SynthConfig c = synth_config_from_json(nlohmann::json{{"n_points", 512}, {"categories", {"cone", "capsule"}}});
  EXPECT_EQ(c.n_points, 512);
  EXPECT_EQ(c.categories.size(), 2u);
  EXPECT_THROW(synth_config_from_json(nlohmann::json{{"n_pionts", 512}}), ConfigError);
  SynthConfig one = small_config();
  one.categories = {"sphere"};
  EXPECT_THROW(one.validate(), ConfigError);
}
