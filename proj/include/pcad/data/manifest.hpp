#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pcad/pc/cloud.hpp"

namespace pcad::data {

inline constexpr int kManifestSchemaVersion = 1;

struct Category {
  int id = 0;  // 1-based
  std::string name;
};

struct SampleEntry {
  std::string id;
  std::string path;  // relative to the manifest directory
  int category_id = 0;
  std::string category_name;
  std::string split;  // "train" or "test"
  int object_label = 0;
  std::string defect_type = "none";
};

struct DatasetManifest {
  int schema_version = kManifestSchemaVersion;
  std::uint64_t seed = 0;
  std::vector<Category> categories;
  std::vector<SampleEntry> samples;
  nlohmann::json generator;  // generator settings, informational

  /// Checks ids, splits, labels and that training samples are all normal.
  /// Throws DataError.
  void validate() const;
  std::size_t count(const std::string& split) const;
  const Category& category(int id) const;
};

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);
void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& path);

struct Sample {
  SampleEntry entry;
  PointCloud cloud;  // category and object_label filled in
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Sample> train;
  std::vector<Sample> test;
};

/// Reads every PLY listed in the manifest. Training clouds carrying an
/// anomaly label or a nonempty mask are rejected with DataError.
Dataset load_dataset(const std::filesystem::path& manifest_path);

/// Generator settings for the synthetic benchmark. Magnitude and radius are
/// in model units; generated objects have unit diameter.
struct SynthConfig {
  std::vector<std::string> categories{"sphere", "torus", "box"};
  int n_points = 2048;
  int train_per_category = 4;
  int test_per_category = 8;
  double anomaly_fraction = 0.5;
  double deform_amplitude = 0.05;
  double defect_magnitude = 0.05;
  double defect_radius = 0.10;
  std::vector<std::string> defect_types{"bulge", "sink", "missing"};
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SynthConfig& c);
SynthConfig synth_config_from_json(const nlohmann::json& j);

/// Generates the full dataset in memory. Sample paths are the relative paths
/// build_dataset would write.
Dataset generate_dataset(const SynthConfig& config);

/// Generates and writes PLY files plus manifest.json under `out_dir`.
DatasetManifest build_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace pcad::data
