#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "pcad/harness/model.hpp"

namespace pcad::harness {

/// Binary checkpoint: 8-byte magic, uint32 format version, uint64 header
/// length, a JSON header (config, config hash, step, categories,
/// calibration, tensor names and shapes), then every tensor as row-major
/// little-endian doubles in header order. The contrastive buffer is not
/// stored.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const Model& model, long step);

struct LoadedCheckpoint {
  std::unique_ptr<Model> model;
  long step = 0;
  std::string config_hash;
};

/// Throws DataError on I/O or format problems.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Throws ConfigError when `config` hashes differently from the checkpoint,
/// unless `allow_mismatch` is set.
void check_config(const LoadedCheckpoint& ckpt, const RunConfig& config, bool allow_mismatch);

}  // namespace pcad::harness
