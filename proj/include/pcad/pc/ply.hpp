#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "pcad/pc/cloud.hpp"

namespace pcad {

/// Reads an ASCII PLY file. Vertex properties x, y, z are required; an
/// integer property `anomaly` becomes the mask. Other properties and elements
/// are ignored. Throws DataError on I/O failure and InvalidInput on malformed
/// content.
PointCloud read_ply(const std::filesystem::path& path);
PointCloud parse_ply(const std::string& text, const std::string& source_name = "<memory>");

/// Writes an ASCII PLY with x, y, z (full double precision), `anomaly` when
/// the cloud has a mask, and `score` when per-point scores are given.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud,
               std::optional<std::span<const double>> scores = std::nullopt);
std::string format_ply(const PointCloud& cloud,
                       std::optional<std::span<const double>> scores = std::nullopt);

}  // namespace pcad
