#include "pcad/data/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "pcad/common/error.hpp"
#include "pcad/common/rng.hpp"
#include "pcad/data/synth.hpp"
#include "pcad/pc/ply.hpp"

namespace pcad::data {

using nlohmann::json;

void DatasetManifest::validate() const {
  if (schema_version != kManifestSchemaVersion) {
    throw DataError("manifest: unsupported schema_version " + std::to_string(schema_version));
  }
  if (categories.empty()) throw DataError("manifest: no categories");
  std::set<int> ids;
  for (const Category& c : categories) {
    if (c.id < 1 || !ids.insert(c.id).second) throw DataError("manifest: category ids must be unique and >= 1");
  }
  std::set<std::string> sample_ids;
  for (const SampleEntry& s : samples) {
    if (!sample_ids.insert(s.id).second) throw DataError("manifest: duplicate sample id '" + s.id + "'");
    if (!ids.count(s.category_id)) throw DataError("manifest: sample '" + s.id + "' has unknown category");
    if (s.split != "train" && s.split != "test") throw DataError("manifest: sample '" + s.id + "' has bad split");
    if (s.object_label != 0 && s.object_label != 1) {
      throw DataError("manifest: sample '" + s.id + "' has bad object_label");
    }
    if (s.split == "train" && s.object_label != 0) {
      throw DataError("manifest: training sample '" + s.id + "' is anomalous");
    }
  }
}

std::size_t DatasetManifest::count(const std::string& split) const {
  std::size_t n = 0;
  for (const SampleEntry& s : samples) n += s.split == split ? 1 : 0;
  return n;
}

const Category& DatasetManifest::category(int id) const {
  for (const Category& c : categories) {
    if (c.id == id) return c;
  }
  throw DataError("manifest: unknown category id " + std::to_string(id));
}

json to_json(const DatasetManifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["seed"] = m.seed;
  j["categories"] = json::array();
  for (const Category& c : m.categories) j["categories"].push_back({{"id", c.id}, {"name", c.name}});
  j["samples"] = json::array();
  for (const SampleEntry& s : m.samples) {
    j["samples"].push_back({{"id", s.id},
                            {"path", s.path},
                            {"category_id", s.category_id},
                            {"category_name", s.category_name},
                            {"split", s.split},
                            {"object_label", s.object_label},
                            {"defect_type", s.defect_type}});
  }
  if (!m.generator.is_null()) j["generator"] = m.generator;
  return j;
}

DatasetManifest manifest_from_json(const json& j) {
  try {
    DatasetManifest m;
    m.schema_version = j.at("schema_version").get<int>();
    m.seed = j.value("seed", std::uint64_t{0});
    for (const json& c : j.at("categories")) m.categories.push_back({c.at("id").get<int>(), c.at("name").get<std::string>()});
    for (const json& s : j.at("samples")) {
      SampleEntry e;
      e.path = s.at("path").get<std::string>();
      e.id = s.value("id", std::filesystem::path(e.path).stem().string());
      e.category_id = s.at("category_id").get<int>();
      e.split = s.at("split").get<std::string>();
      e.object_label = s.at("object_label").get<int>();
      e.defect_type = s.value("defect_type", std::string(e.object_label ? "unknown" : "none"));
      m.samples.push_back(std::move(e));
    }
    for (SampleEntry& e : m.samples) e.category_name = m.category(e.category_id).name;
    if (j.contains("generator")) m.generator = j["generator"];
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
}

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << to_json(m).dump(2) << '\n';
  if (!out) throw DataError("failed writing manifest " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("manifest " + path.string() + ": " + e.what());
  }
  return manifest_from_json(j);
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  Dataset ds;
  ds.manifest = load_manifest(manifest_path);
  const std::filesystem::path root = manifest_path.parent_path();
  for (const SampleEntry& e : ds.manifest.samples) {
    Sample s{e, read_ply(root / e.path)};
    s.cloud.category = e.category_id;
    s.cloud.object_label = e.object_label;
    const bool masked = s.cloud.mask && std::find(s.cloud.mask->begin(), s.cloud.mask->end(), 1) != s.cloud.mask->end();
    if (e.split == "train") {
      if (masked) throw DataError("training sample " + (root / e.path).string() + " carries anomaly points");
      ds.train.push_back(std::move(s));
    } else {
      if (e.object_label == 1 && !masked) {
        throw DataError("anomalous test sample " + (root / e.path).string() + " has an empty mask");
      }
      ds.test.push_back(std::move(s));
    }
  }
  return ds;
}

void SynthConfig::validate() const {
  if (categories.size() < 2) throw ConfigError("synth: the unified setting needs at least two categories");
  std::set<std::string> seen;
  for (const std::string& c : categories) {
    shape_family_from_string(c);
    if (!seen.insert(c).second) throw ConfigError("synth: duplicate category '" + c + "'");
  }
  if (n_points < 4) throw ConfigError("synth: n_points too small");
  if (train_per_category < 1 || test_per_category < 0) throw ConfigError("synth: bad sample counts");
  if (anomaly_fraction < 0.0 || anomaly_fraction > 1.0) throw ConfigError("synth: anomaly_fraction outside [0, 1]");
  if (deform_amplitude < 0.0 || deform_amplitude >= 1.0) throw ConfigError("synth: deform_amplitude outside [0, 1)");
  if (defect_magnitude <= 0.0) throw ConfigError("synth: defect_magnitude must be positive");
  if (defect_radius <= 0.0 || defect_radius >= 1.0) throw ConfigError("synth: defect_radius must lie in (0, 1)");
  if (defect_types.empty()) throw ConfigError("synth: no defect types");
  for (const std::string& d : defect_types) defect_type_from_string(d);
}

json to_json(const SynthConfig& c) {
  return {{"categories", c.categories},
          {"n_points", c.n_points},
          {"train_per_category", c.train_per_category},
          {"test_per_category", c.test_per_category},
          {"anomaly_fraction", c.anomaly_fraction},
          {"deform_amplitude", c.deform_amplitude},
          {"defect_magnitude", c.defect_magnitude},
          {"defect_radius", c.defect_radius},
          {"defect_types", c.defect_types},
          {"seed", c.seed}};
}

SynthConfig synth_config_from_json(const json& j) {
  static const std::set<std::string> known{"categories",       "n_points",         "train_per_category",
                                           "test_per_category", "anomaly_fraction", "deform_amplitude",
                                           "defect_magnitude",  "defect_radius",    "defect_types",
                                           "seed"};
  if (!j.is_object()) throw ConfigError("synth config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("synth config: unknown key '" + key + "'");
  }
  try {
    SynthConfig c;
    c.categories = j.value("categories", c.categories);
    c.n_points = j.value("n_points", c.n_points);
    c.train_per_category = j.value("train_per_category", c.train_per_category);
    c.test_per_category = j.value("test_per_category", c.test_per_category);
    c.anomaly_fraction = j.value("anomaly_fraction", c.anomaly_fraction);
    c.deform_amplitude = j.value("deform_amplitude", c.deform_amplitude);
    c.defect_magnitude = j.value("defect_magnitude", c.defect_magnitude);
    c.defect_radius = j.value("defect_radius", c.defect_radius);
    c.defect_types = j.value("defect_types", c.defect_types);
    c.seed = j.value("seed", c.seed);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
}

namespace {

std::string sample_name(const std::string& category, const char* split, int i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%s_%03d", category.c_str(), split, i);
  return buf;
}

}  // namespace

Dataset generate_dataset(const SynthConfig& config) {
  config.validate();
  Dataset ds;
  ds.manifest.seed = config.seed;
  ds.manifest.generator = to_json(config);
  const int n_anomalous = static_cast<int>(std::lround(config.test_per_category * config.anomaly_fraction));

  for (std::size_t ci = 0; ci < config.categories.size(); ++ci) {
    const std::string& name = config.categories[ci];
    const int cid = static_cast<int>(ci) + 1;
    const ShapeFamily family = shape_family_from_string(name);
    ds.manifest.categories.push_back({cid, name});
    const std::uint64_t cat_seed = derive_seed(config.seed, static_cast<std::uint64_t>(family) + 1);

    for (int i = 0; i < config.train_per_category; ++i) {
      Sample s;
      s.entry = {sample_name(name, "train", i), "", cid, name, "train", 0, "none"};
      s.entry.path = "train/" + s.entry.id + ".ply";
      s.cloud = generate_category(family, config.n_points, derive_seed(derive_seed(cat_seed, 1), i),
                                  config.deform_amplitude);
      s.cloud.category = cid;
      s.cloud.object_label = 0;
      ds.manifest.samples.push_back(s.entry);
      ds.train.push_back(std::move(s));
    }
    for (int i = 0; i < config.test_per_category; ++i) {
      const bool anomalous = i >= config.test_per_category - n_anomalous;
      Sample s;
      s.entry = {sample_name(name, "test", i), "", cid, name, "test", anomalous ? 1 : 0, "none"};
      s.entry.path = "test/" + s.entry.id + ".ply";
      const std::uint64_t seed = derive_seed(derive_seed(cat_seed, 2), i);
      s.cloud = generate_category(family, config.n_points, seed, config.deform_amplitude);
      s.cloud.category = cid;
      if (anomalous) {
        const std::string& type = config.defect_types[static_cast<std::size_t>(i) % config.defect_types.size()];
        Rng rng(derive_seed(seed, 0xdefec7));
        DefectResult d = inject_defect(s.cloud, defect_type_from_string(type), config.defect_magnitude,
                                       config.defect_radius, rng);
        s.cloud = std::move(d.cloud);
        s.cloud.category = cid;
        s.entry.defect_type = type;
      } else {
        s.cloud.mask = std::vector<std::uint8_t>(static_cast<std::size_t>(s.cloud.size()), 0);
      }
      s.cloud.object_label = anomalous ? 1 : 0;
      ds.manifest.samples.push_back(s.entry);
      ds.test.push_back(std::move(s));
    }
  }
  ds.manifest.validate();
  return ds;
}

DatasetManifest build_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
  Dataset ds = generate_dataset(config);
  std::error_code ec;
  for (const char* sub : {"train", "test"}) {
    std::filesystem::create_directories(out_dir / sub, ec);
    if (ec) throw DataError("cannot create " + (out_dir / sub).string() + ": " + ec.message());
  }
  for (const auto* split : {&ds.train, &ds.test}) {
    for (const Sample& s : *split) write_ply(out_dir / s.entry.path, s.cloud);
  }
  save_manifest(out_dir / "manifest.json", ds.manifest);
  return ds.manifest;
}

}  // namespace pcad::data
