#include "pcad/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "pcad/common/error.hpp"

namespace pcad::harness {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'P', 'C', 'A', 'D', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <class T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T read_pod(std::istream& in, const std::string& path) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("checkpoint " + path + " is truncated");
  return v;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model, long step) {
  json header;
  header["config"] = to_json(model.config());
  header["config_hash"] = config_hash(model.config());
  header["step"] = step;
  header["categories"] = json::array();
  for (const data::Category& c : model.categories()) header["categories"].push_back({{"id", c.id}, {"name", c.name}});
  header["calibration"] = model.calibration ? json{{"lo", model.calibration->lo}, {"hi", model.calibration->hi}} : json();
  header["tensors"] = json::array();
  for (const auto& [name, entry] : model.params().entries()) {
    header["tensors"].push_back({{"name", name}, {"rows", entry.tensor.rows()}, {"cols", entry.tensor.cols()}});
  }
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  write_pod(out, kCheckpointVersion);
  write_pod(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, entry] : model.params().entries()) {
    const nn::Matrix& v = entry.tensor.value();
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string p = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + p);
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw DataError(p + " is not a checkpoint");
  }
  const auto version = read_pod<std::uint32_t>(in, p);
  if (version != kCheckpointVersion) throw DataError("checkpoint " + p + " has unsupported version " + std::to_string(version));
  const auto length = read_pod<std::uint64_t>(in, p);
  if (length > (1ULL << 30)) throw DataError("checkpoint " + p + " header is implausibly large");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length))) throw DataError("checkpoint " + p + " is truncated");

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + p + " header: " + e.what());
  }

  LoadedCheckpoint ck;
  try {
    std::vector<data::Category> cats;
    for (const json& c : header.at("categories")) cats.push_back({c.at("id").get<int>(), c.at("name").get<std::string>()});
    ck.model = std::make_unique<Model>(config_from_json(header.at("config")), std::move(cats));
    ck.step = header.at("step").get<long>();
    ck.config_hash = header.at("config_hash").get<std::string>();
    if (!header.at("calibration").is_null()) {
      ck.model->calibration = Calibration{header["calibration"].at("lo").get<double>(),
                                          header["calibration"].at("hi").get<double>()};
    }
    auto& entries = ck.model->params().entries();
    if (header.at("tensors").size() != entries.size()) throw DataError("checkpoint " + p + " tensor count mismatch");
    for (const json& t : header.at("tensors")) {
      const std::string name = t.at("name").get<std::string>();
      auto it = entries.find(name);
      if (it == entries.end()) throw DataError("checkpoint " + p + " has unexpected tensor " + name);
      nn::Matrix& v = it->second.tensor.mutable_value();
      if (v.rows() != t.at("rows").get<Eigen::Index>() || v.cols() != t.at("cols").get<Eigen::Index>()) {
        throw DataError("checkpoint " + p + " tensor " + name + " has the wrong shape");
      }
      if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)))) {
        throw DataError("checkpoint " + p + " is truncated");
      }
    }
  } catch (const json::exception& e) {
    throw DataError("checkpoint " + p + " header: " + e.what());
  }
  if (ck.config_hash != config_hash(ck.model->config())) {
    throw DataError("checkpoint " + p + " config hash does not match its stored config");
  }
  return ck;
}

void check_config(const LoadedCheckpoint& ckpt, const RunConfig& config, bool allow_mismatch) {
  RunConfig resolved = config;
  if (resolved.categories == 0) resolved.categories = ckpt.model->category_count();
  const std::string h = config_hash(resolved);
  if (h != ckpt.config_hash && !allow_mismatch) {
    throw ConfigError("config hash " + h + " differs from checkpoint hash " + ckpt.config_hash +
                      " (pass the override flag to evaluate anyway)");
  }
}

}  // namespace pcad::harness
