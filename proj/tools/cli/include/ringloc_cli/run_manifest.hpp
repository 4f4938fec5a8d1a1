#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ringloc/types.hpp"

namespace ringloc::cli {

struct ManifestFrame {
  std::string id;
  std::filesystem::path gray;
  std::filesystem::path depth;
  std::optional<std::filesystem::path> roi;
  std::optional<double> value;  ///< sweep coordinate, when the frame came from a sweep
};

/// Frames to process in one batch. The simulator's manifest.json is a valid
/// run manifest; hand-written ones need only "frames" with id, gray and depth.
struct RunManifest {
  std::vector<ManifestFrame> frames;
  std::optional<CameraIntrinsics> intrinsics;
  double depth_scale = 10.0;  ///< PNG units per mm
  std::filesystem::path output_dir;

  /// Ids non-empty and unique; every referenced file exists.
  void validate() const;
};

/// Relative paths resolve against base_dir. Throws ParseError.
RunManifest parse_run_manifest(std::string_view document, const std::filesystem::path& base_dir = {});
RunManifest load_run_manifest(const std::filesystem::path& path);

}  // namespace ringloc::cli
