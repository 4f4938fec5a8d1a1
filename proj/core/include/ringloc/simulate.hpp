#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ringloc/types.hpp"

namespace ringloc::sim {

/// Per-distance sensor degradation. Every field is linear in distance and
/// clamped at zero.
struct NoiseModel {
  double z_sigma_at_400 = 0.3;    ///< mm
  double z_sigma_slope = 0.001;   ///< mm per mm beyond 400
  double blur_px_at_400 = 0.8;    ///< Gaussian sigma in px
  double blur_slope = 0.002;      ///< px per mm beyond 400
  double speckle_density = 0.0;   ///< fraction of gray pixels forced to 255
  double dropout_rate = 0.0;      ///< fraction of depth pixels forced to 0

  void validate() const;
  double z_sigma(double distance_mm) const;
  double blur_sigma(double distance_mm) const;

  static NoiseModel none() { return {0.0, 0.0, 0.0, 0.0, 0.0, 0.0}; }
};

enum class SurfaceKind { plane, sphere };

struct Surface {
  SurfaceKind kind = SurfaceKind::plane;
  double radius_mm = 0.0;  ///< sphere only; must exceed the ring's outer radius
};

struct SceneConfig {
  /// Ring frame -> camera frame. When unset the pose follows from distance,
  /// tilt and lateral offset: the ring faces the camera, tilted about the
  /// camera x axis, with its base centre at (offset_x, offset_y, distance).
  std::optional<RigidTransform> marker_pose;
  double distance = 400.0;  ///< mm, in [200, 800]
  double tilt = 0.0;        ///< degrees, in [0, 45]
  double offset_x = 0.0;
  double offset_y = 0.0;
  Surface surface;
  RingSpec ring;
  CameraIntrinsics intrinsics{600.0, 600.0, 320.0, 240.0, 640, 480};
  double lighting_level = 1.0;        ///< in [0, 1]
  double contrast_ring_width = 4.0;   ///< mm of dark band around the ring
  NoiseModel noise;
  bool single_shot = false;  ///< speckle the gray frame (density 0.05 unless set)
  std::uint64_t seed = 0;

  void validate() const;
  RigidTransform pose() const;
};

struct GroundTruth {
  Point3 center = Point3::Zero();   ///< ring base centre, camera frame
  Vector3 normal = Vector3::UnitZ();  ///< outward ring axis
  Pixel projected_center = Pixel::Zero();
  double projected_outer_radius = 0.0;  ///< px
};

struct Frame {
  GrayImage gray;
  DepthImage depth;
  GroundTruth truth;
};

/// Deterministic given the config (seed included).
Frame render(const SceneConfig& config);

/// Noiseless depth of the scene along the ray through pixel (u, v); 0 on a miss.
double exact_depth(const SceneConfig& config, double u, double v);

enum class SweepAxis { distance, tilt, noise };

struct SweepItem {
  std::string id;
  double value = 0.0;
  SceneConfig config;
};

/// runs_per_value seeded configs per value (seed = template seed + running
/// index). For the noise axis the value is z_sigma_at_400.
std::vector<SweepItem> plan_sweep(const SceneConfig& base, SweepAxis axis, const std::vector<double>& values,
                                  int runs_per_value);

struct SweepOutput {
  std::filesystem::path manifest;
  std::size_t frames = 0;
};

/// Renders and writes gray/depth PNGs, per-frame ground truth and manifest.json
/// into out_dir. Refuses to replace an existing manifest unless overwrite.
SweepOutput write_sweep(const std::vector<SweepItem>& items, const std::filesystem::path& out_dir,
                        int jobs = 1, bool overwrite = false);

std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& text);

}  // namespace ringloc::sim

namespace ringloc::sim {

std::string ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(const std::string& document);

}  // namespace ringloc::sim
